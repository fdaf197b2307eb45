from setuptools import setup, find_packages


# Function to read requirements from requirements.txt file
def parse_requirements(filename):
    with open(filename) as f:
        return [line for line in f.read().splitlines() if line and not line.startswith("#")]


# Read requirements from requirements.txt
requirements = parse_requirements("requirements.txt")

setup(
    name="cutspace",
    version="0.1.0",
    description="Enumeration, evaluation and random-walk search of cut-posteriors for Bayesian networks",
    author="The cutspace authors",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.9",
    install_requires=requirements,  # Add requirements from requirements.txt
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["cutspace=cutspace.cli:main"]},
)
