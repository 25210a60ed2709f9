import importlib
import inspect
import logging
import pkgutil
import textwrap
from pathlib import Path

import pytest

import toeplitz_lattice

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parent.parent
LIBRARY_NAME = "toeplitz_lattice"


def extract_code_blocks(docstring: str) -> list[str]:
    """Extract code blocks from a docstring."""
    code_blocks = []
    in_code_block = False
    code_block = []

    for line in docstring.split("\n"):
        if line.strip().startswith("```python"):
            in_code_block = True
            continue
        elif line.strip().startswith("```"):
            in_code_block = False
            if code_block:
                code_blocks.append("\n".join(code_block))
                code_block = []
            continue

        if in_code_block:
            code_block.append(line)

    return code_blocks


def exec_example(example: str) -> None:
    """Execute a code example."""
    example = textwrap.dedent(example)
    namespace = {"__name__": "__not_main__"}
    try:
        code = compile(example, "<string>", "exec")
        exec(code, namespace)
    except Exception as err:
        raise Exception(f"Failed to execute example:\n\n{example}") from err


def collect_examples(obj: object) -> list[str]:
    """Examples of an object and, for classes, of the methods defined in this library."""
    examples = extract_code_blocks(inspect.getdoc(obj) or "")
    if inspect.isclass(obj):
        for _, method in inspect.getmembers(obj, inspect.isfunction):
            if (method.__module__ or "").startswith(LIBRARY_NAME):
                examples.extend(extract_code_blocks(inspect.getdoc(method) or ""))
    return examples


def library_examples() -> list[tuple[str, str]]:
    found = []
    for info in pkgutil.walk_packages(toeplitz_lattice.__path__, f"{LIBRARY_NAME}."):
        module = importlib.import_module(info.name)
        for name, obj in inspect.getmembers(
            module, lambda o: inspect.isfunction(o) or inspect.isclass(o)
        ):
            if getattr(obj, "__module__", None) != info.name:
                continue
            for i, example in enumerate(collect_examples(obj)):
                found.append((f"{info.name}.{name}[{i}]", example))
    return found


def docs_examples() -> list[tuple[str, str]]:
    found = []
    for path in sorted((ROOT / "docs").rglob("*.md")):
        for i, example in enumerate(extract_code_blocks(path.read_text())):
            found.append((f"{path.name}[{i}]", example))
    return found


LIBRARY_EXAMPLES = library_examples()
DOCS_EXAMPLES = docs_examples()


def test_library_has_examples():
    assert len(LIBRARY_EXAMPLES) >= 10


@pytest.mark.parametrize(
    "example", [e for _, e in LIBRARY_EXAMPLES], ids=[n for n, _ in LIBRARY_EXAMPLES]
)
def test_docstring_example(example: str):
    exec_example(example)


@pytest.mark.parametrize(
    "example", [e for _, e in DOCS_EXAMPLES], ids=[n for n, _ in DOCS_EXAMPLES]
)
def test_docs_example(example: str):
    exec_example(example)
