from setuptools import setup, find_packages

setup(
    name="dyncrowd",
    version="0.1.0",
    description="Streaming dynamic clustering of dense-crowd pedestrian tracks",
    packages=find_packages(exclude=["examples", "examples.*"]),
    install_requires=[
        'numpy>=1.21',
        'scipy>=1.7',
        'pyyaml>=6.0',
        'psutil>=5.9',
        'structlog>=21.5.0',
        'colorama>=0.4.4; platform_system == "Windows"',
    ],
    extras_require={
        'test': [
            'pytest>=7.0.0',
        ],
    },
    entry_points={
        'console_scripts': [
            'dyncrowd=dyncrowd.cli:main',
        ],
    },
    python_requires='>=3.8',
)
