import importlib
import sys

REQUIRED_PYTHON = (3, 8)
REQUIRED_PACKAGES = ('click', 'dotenv', 'joblib', 'mpmath', 'numpy',
                     'pandas', 'pyparsing', 'scipy', 'tqdm')


def main():
    if sys.version_info[:2] < REQUIRED_PYTHON:
        raise TypeError(
            "This project requires Python {}.{}+. Found: Python {}".format(
                *REQUIRED_PYTHON, sys.version))
    missing = []
    for name in REQUIRED_PACKAGES:
        try:
            importlib.import_module(name)
        except ImportError:
            missing.append(name)
    if missing:
        raise ImportError("Missing packages: {}".format(', '.join(missing)))
    print(">>> Development environment passes all tests!")


if __name__ == '__main__':
    main()
