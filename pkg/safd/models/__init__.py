"""Bundled example models, loaded by name with :func:`safd.load_model`."""
