from setuptools import setup, find_packages

# pylint: disable=no-name-in-module,F0401,W0232,C0111,R0201


def readme():
    "Returns the contents of the README.rst file"
    with open("README.rst") as f:
        return f.read()


setup(
    name="liboam",
    version="20261018",
    description="Simulation and analysis of very-high-charge OAM modes and "
                "hybrid polarization/OAM entanglement",
    long_description=readme(),
    packages=find_packages(),
    package_data={"liboam": ["presets/*.yaml"]},
    install_requires=[
        "numpy",
        "scipy",
        "lmfit",
        "uncertainties",
        "pandas",
        "SQLAlchemy",
        "PyYAML",
        "docopt",
        "imageio",
        "Pillow",
    ],
    scripts=[
        "bin/oamsim",
    ],
    test_suite="liboam",
)
