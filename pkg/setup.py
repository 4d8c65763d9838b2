from setuptools import find_packages, setup

setup(
    name='sudlerlab',
    packages=find_packages(exclude=('tests',)),
    version='0.1.0',
    description='Sudler products, the figure-eight Kashaev invariant at '
                'rationals and their growth constants along convergents',
    author='Nathan Nguyen',
    license='',
    install_requires=[
        'click>=8.0',
        'joblib>=1.0.1',
        'mpmath>=1.2.1',
        'numpy>=1.19.5',
        'pandas>=1.1.5',
        'pyparsing>=3.0.9',
        'python-dotenv>=0.5.1',
        'scipy>=1.4.1',
        'tqdm>=4.41.1',
    ],
    entry_points={
        'console_scripts': ['sudlerlab=src.cli:main'],
    },
)
