"""Hypothesis strategies built on the seeded corpus generators"""
from hypothesis import strategies as st

from toposforge.core.loaders import BUILTIN_SPACES
from toposforge.services import corpus

seeds = st.integers(min_value=0, max_value=2**16)

small_spaces = st.sampled_from(["sierpinski", "point", "discrete2", "indiscrete2", "vee"]).map(
    lambda name: BUILTIN_SPACES[name]()
)


@st.composite
def environments(draw, max_stalk: int = 2):
    """A built-in space with a random sheaf F and maybe a global constant c"""
    X = draw(small_spaces)
    return corpus.random_environment(corpus.make_rng(draw(seeds)), X, max_stalk)


@st.composite
def formulas_over(draw, env, depth: int = 2, geometric: bool = False, scope=()):
    rng = corpus.make_rng(draw(seeds))
    return corpus.FormulaGenerator(rng, env, geometric=geometric).formula(depth, scope)
