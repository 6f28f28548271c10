"""Bundled machines and programs with their expected outcomes.

The corpus ships inside the package so the command line examples and the
test suite run against the same bytes.  ``manifest.txt`` records, per file,
what the test suite pins down; ``load_corpus`` parses every file eagerly so
that a corpus that stopped parsing or typechecking breaks loudly.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional, Union

from .formulas import Program
from .machines import Machine, parse_machine
from .parser import parse_program
from .typecheck import check_program
from .verifier import typecheck_machine


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class CorpusCase:
    name: str                      # file name inside the corpus directory
    kind: str                      # "machine" | "program"
    text: str                      # file contents
    expected: dict[str, str]       # manifest entries for this file
    parsed: Union[Machine, Program]
    golden: Optional[str] = None   # frozen command line output, if recorded


def _corpus_root():
    return resources.files(__package__) / "data" / "corpus"


def corpus_text(name: str) -> str:
    """Contents of one corpus file."""
    path = _corpus_root()
    for part in name.split("/"):
        path = path / part
    return path.read_text()


def parse_manifest(text: str) -> dict[str, dict[str, str]]:
    """Sections of ``key = value`` lines; '#' starts a comment."""
    out: dict[str, dict[str, str]] = {}
    section: Optional[dict[str, str]] = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name in out:
                raise CorpusError(f"manifest line {ln}: duplicate section {name!r}")
            section = out[name] = {}
            continue
        if "=" not in line or section is None:
            raise CorpusError(f"manifest line {ln}: expected 'key = value'")
        key, val = line.split("=", 1)
        section[key.strip()] = val.strip()
    return out


def load_corpus() -> list[CorpusCase]:
    manifest = parse_manifest(corpus_text("manifest.txt"))
    cases: list[CorpusCase] = []
    for name, expected in manifest.items():
        text = corpus_text(name)
        kind = expected.get("kind")
        if kind == "machine":
            parsed: Union[Machine, Program] = parse_machine(text)
            errors = typecheck_machine(parsed)
        elif kind == "program":
            parsed = parse_program(text)
            errors = [str(e) for e in check_program(parsed)]
        else:
            raise CorpusError(f"{name}: manifest kind must be machine or program")
        if errors:
            raise CorpusError(f"{name}: {'; '.join(errors)}")
        golden = None
        if "golden" in expected:
            golden = corpus_text("golden/" + expected["golden"])
        cases.append(CorpusCase(name, kind, text, expected, parsed, golden))
    return cases
