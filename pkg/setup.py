# setup.py

from setuptools import setup, find_packages

setup(
    name="ciel_toolkit",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    include_package_data=True,
    package_data={"ciel_toolkit": ["data/derivations/*.prf"]},
    install_requires=[
        "numpy>=1.20.0",
        "scipy>=1.7.0",
        "pandas>=1.3.0",
        "lark>=1.1.0",
        "psutil>=5.8.0",
    ],
    extras_require={
        "dev": [
            "pytest>=6.2.5",
            "black>=21.9b0",
            "flake8>=3.9.2",
            "isort>=5.9.3",
        ],
    },
    entry_points={
        "console_scripts": [
            "ciel=ciel_toolkit.main:main",
        ],
    },
    description="Model checking, satisfiability and proof checking for common knowledge of abstract groups",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
    python_requires=">=3.8",
)
