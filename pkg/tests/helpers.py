from pathlib import Path

from hypothesis import strategies as st

from services.specfile import ModelFile, parse

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Random elements are drawn from integer seeds so failures shrink to a reproducible seed.
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def load(name: str) -> ModelFile:
    return parse(load_text(name))


def qplane_text(q: str, alpha: str, beta: str, gamma: str, delta: str) -> str:
    """A q-commuting plane with diagonal left action; consistent for every choice of scalars."""
    return "\n".join([
        "generators: x y",
        f"rule: y x = {q} x y",
        "basis: dx dy",
        f"left: x dx = dx.( {alpha} x )",
        f"left: x dy = dy.( {beta} x )",
        f"left: y dx = dx.( {gamma} y )",
        f"left: y dy = dy.( {delta} y )",
    ]) + "\n"


def load_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")
