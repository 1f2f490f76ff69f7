from .extract import extract_features  # noqa: F401
