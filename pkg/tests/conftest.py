import logging
from pathlib import Path

import pytest

import journal_indicators
from journal_indicators.config import SettingsManager
from journal_indicators.dataset import load_summary

MEDICAL_PATH = Path(journal_indicators.__file__).parent / "data" / "medical_journals.csv"


@pytest.fixture(scope="session")
def medical():
    """The 30 bundled journals, in file order."""
    return load_summary()


@pytest.fixture(scope="session")
def journals(medical):
    """Bundled journals keyed by name."""
    return {rec.name: rec for rec in medical}


@pytest.fixture
def medical_path():
    return str(MEDICAL_PATH)


@pytest.fixture
def settings():
    return SettingsManager()


@pytest.fixture
def write_file(tmp_path):
    """Write text to a file under tmp_path and return its path as a string."""

    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def restore_logging():
    """Undo the root-logger changes made by the CLI's logging setup."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)
