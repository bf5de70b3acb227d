import sys


def main():
    try:
        from mprlab.cli import main as cli_main
        return cli_main()
    except Exception:
        import traceback
        with open('mprlab_error.log', 'w') as f:
            f.write(traceback.format_exc())
        raise


if __name__ == "__main__":
    sys.exit(main())
