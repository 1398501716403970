"""Parameterised model families for benchmarks and randomized testing.

Binary trees (BT) are complete OR-trees in heap numbering: node ``n_i`` has
children ``n_{2i+1}`` and ``n_{2i+2}``, the root is ``n_0`` and every leaf
reads its own exogenous input ``n_i_exo``.  A tree of height ``h`` has ``h``
levels, i.e. ``2**h - 1`` nodes (height 12 gives 4095 nodes n_0..n_4094).

ABT attaches a fixed eight-variable abstract component to a BT root::

    B = B_exo
    C = B & !n_0          # backup mechanisms, pre-empted while n_0 holds
    D = B & !n_0
    E = B & !n_0
    F = B & !n_0
    G = C & D
    H = G | E
    I = n_0 | C | D | H | F

Once the tree root fails, ``I`` survives through four independent backups,
so keeping ``I`` false needs a contingency set of four variables.
"""

from __future__ import annotations

import random
from typing import Optional

from .formula import And, Const, Formula, Iff, Not, Or, Var
from .model import CausalModel


def _check_height(height: int) -> None:
    if not isinstance(height, int) or isinstance(height, bool) or height < 1:
        raise ValueError(f"height must be a positive integer, got {height!r}")


def tree_size(height: int) -> int:
    return 2 ** height - 1


def leaf_indices(height: int) -> range:
    return range(2 ** (height - 1) - 1, 2 ** height - 1)


def _tree_equations(height: int) -> tuple:
    n = tree_size(height)
    first_leaf = 2 ** (height - 1) - 1
    exogenous = [f"n_{i}_exo" for i in range(first_leaf, n)]
    equations = {}
    for i in range(n):
        if i >= first_leaf:
            equations[f"n_{i}"] = Var(f"n_{i}_exo")
        else:
            equations[f"n_{i}"] = Or((Var(f"n_{2 * i + 1}"), Var(f"n_{2 * i + 2}")))
    return exogenous, equations


def generate_binary_tree(height: int) -> CausalModel:
    _check_height(height)
    exogenous, equations = _tree_equations(height)
    return CausalModel.from_equations(f"BT_{height}", exogenous, equations)


def _abstract_component(root: str) -> dict:
    r = Var(root)
    b = Var("B")
    backup = And((b, Not(r)))
    return {
        "B": Var("B_exo"),
        "C": backup,
        "D": backup,
        "E": backup,
        "F": backup,
        "G": And((Var("C"), Var("D"))),
        "H": Or((Var("G"), Var("E"))),
        "I": Or((r, Var("C"), Var("D"), Var("H"), Var("F"))),
    }


def generate_abt(height: int) -> CausalModel:
    _check_height(height)
    exogenous, equations = _tree_equations(height)
    equations.update(_abstract_component("n_0"))
    return CausalModel.from_equations(f"ABT_{height}", exogenous + ["B_exo"], equations)


# --- random models ----------------------------------------------------------

def random_formula(rng: random.Random, names, depth: int = 2, consts: bool = False) -> Formula:
    """Random formula over ``names`` (non-empty) with nesting at most ``depth``."""
    names = list(names)
    if depth <= 0 or rng.random() < 0.3:
        if consts and rng.random() < 0.05:
            return Const(rng.random() < 0.5)
        v = Var(rng.choice(names))
        return Not(v) if rng.random() < 0.3 else v
    kind = rng.choice(("and", "or", "or", "and", "not", "iff"))
    if kind == "not":
        return Not(random_formula(rng, names, depth - 1, consts))
    if kind == "iff":
        return Iff(random_formula(rng, names, depth - 1, consts), random_formula(rng, names, depth - 1, consts))
    k = rng.randint(2, 3)
    args = tuple(random_formula(rng, names, depth - 1, consts) for _ in range(k))
    return And(args) if kind == "and" else Or(args)


def generate_random(
    rng: random.Random,
    n_endogenous: int,
    n_exogenous: Optional[int] = None,
    max_parents: int = 3,
    name: str = "Random",
) -> CausalModel:
    """Random acyclic model; each variable reads up to ``max_parents`` earlier ones."""
    if n_exogenous is None:
        n_exogenous = rng.randint(1, max(1, n_endogenous // 2))
    exogenous = [f"U{i}" for i in range(n_exogenous)]
    pool = list(exogenous)
    equations = {}
    for i in range(n_endogenous):
        v = f"V{i}"
        k = rng.randint(1, min(max_parents, len(pool)))
        parents = rng.sample(pool, k)
        equations[v] = random_formula(rng, parents, depth=2)
        pool.append(v)
    return CausalModel.from_equations(name, exogenous, equations)
