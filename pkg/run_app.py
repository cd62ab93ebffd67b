import sys
import traceback

from app import run


def main():
    try:
        code = run(sys.argv[1:])
    except Exception:
        # 打印详细错误堆栈
        traceback.print_exc()
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
