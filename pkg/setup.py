import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="clickbait-id",
    version="0.1.0",
    description="Indonesian clickbait headline classification with frozen multilingual encoder embeddings",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    package_data={"clickbait_id": ["data/*.txt"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
    install_requires=[
        'torch>=1.6.0',
        'tensorboard>=2.3.0',
        'pytorch-ignite==0.4.*',
        'numpy',
        'onnxruntime>=1.8',
        'pandas',
        'PySastrawi',
        'scikit-learn',
        'scipy',
        'tqdm',
    ],
    extras_require={
        'test': ['pytest', 'onnx'],
    },
    entry_points={
        'console_scripts': [
            'clickbait-id=clickbait_id.cli:main',
        ],
    },
)
