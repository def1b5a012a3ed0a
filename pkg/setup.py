from setuptools import find_packages, setup

with open("requirements.txt", encoding="utf-8") as handle:
    requirements = [
        line.strip()
        for line in handle
        if line.strip() and not line.startswith("#")
    ]

runtime = [r for r in requirements if not r.startswith(("pytest", "black", "flake8", "mypy"))]
dev = [r for r in requirements if r not in runtime]

setup(
    name="uav-handover-sim",
    version="0.1.0",
    description="Q-learning handover decisions for cellular-connected drones",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=runtime,
    extras_require={"dev": dev},
    entry_points={"console_scripts": ["uav-ho=simulator.main:main"]},
)
