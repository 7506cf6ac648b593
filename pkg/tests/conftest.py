import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


SAMPLE_BANK = {
    "version": 1,
    "questions": [
        {
            "id": "float-decl",
            "prompt": "Declare the type of a floating point variable.",
            "answers": [
                {"pattern": "float|double", "fraction": 1.0, "feedback": "Either type works."}
            ],
            "hints": {"enabled": True, "char_penalty": 0.1, "lexeme_penalty": 0.2},
            "mode": "formative",
        },
        {
            "id": "int-decl",
            "prompt": "Declare an integer variable named with one lowercase letter.",
            "answers": [
                {"pattern": "int\\s+[a-z]\\s*;", "fraction": 1.0, "feedback": ""},
                {"pattern": "int\\s+[a-z]", "fraction": 0.5, "feedback": "Missing the semicolon."},
            ],
            "hints": {"enabled": True, "char_penalty": 0.05, "lexeme_penalty": 0.1},
            "mode": "formative",
        },
        {
            "id": "wrapped-five",
            "prompt": "Write the literal 5, parentheses allowed.",
            "answers": [
                {"pattern": "(?###parens_opt<)5(?###>)", "fraction": 1.0, "feedback": ""}
            ],
            "hints": {"enabled": True, "char_penalty": 0.1, "lexeme_penalty": 0.1},
            "mode": "formative",
        },
        {
            "id": "exam-loop",
            "prompt": "Write a for header counting i from 0 to 9.",
            "answers": [
                {
                    "pattern": "for\\s*\\(\\s*int\\s+([a-z])\\s*=\\s*0\\s*;\\s*\\1\\s*<\\s*10\\s*;\\s*(?:\\1\\+\\+|\\+\\+\\1)\\s*\\)",
                    "fraction": 1.0,
                    "feedback": "",
                }
            ],
            "hints": {"enabled": False, "char_penalty": 0.0, "lexeme_penalty": 0.0},
            "mode": "summative",
        },
    ],
}


@pytest.fixture(scope="session")
def sample_bank_json() -> str:
    return json.dumps(SAMPLE_BANK)


@pytest.fixture(scope="session")
def sample_bank(sample_bank_json):
    from linegrade import load_bank

    return load_bank(sample_bank_json)


@pytest.fixture()
def bank_file(tmp_path, sample_bank_json):
    path = tmp_path / "bank.json"
    path.write_text(sample_bank_json, encoding="utf-8")
    return path
