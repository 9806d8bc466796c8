from setuptools import find_packages, setup

with open('requirements.txt', 'r', encoding='utf-8') as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith('pytest')]

setup(
    name='fermifock',
    version='1.0.0',
    description='Fermionic Fock-space simulator and dual-rail encoding verifier',
    python_requires='>=3.9',
    py_modules=[
        'cli',
        'control_compiler',
        'evolution',
        'exports',
        'fock_core',
        'gates',
        'hamiltonians',
        'random_circuits',
        'report_generator',
        'schemas',
        'simulation_runner',
        'theta_encoding',
    ],
    packages=find_packages(include=['config', 'parsers']),
    install_requires=requirements,
    entry_points={'console_scripts': ['fermifock=cli:cli']},
)
