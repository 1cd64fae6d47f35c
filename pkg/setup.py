from setuptools import setup, find_packages

setup(
    name="torus-paircorr",
    version="1.0.0",
    description="Pair correlation statistics, additive energy and witnesses for sequences on the d-torus",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "numba>=0.56",
        "click>=8.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "torus-paircorr=torus_paircorr.cli:main",
        ],
    },
)
