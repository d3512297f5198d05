__version__ = "0.1.0"

# Written into trace headers; bump when generated bytes could change.
GENERATOR_TAG = f"railtdl-{__version__}"
