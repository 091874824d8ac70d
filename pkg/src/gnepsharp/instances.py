"""Instance files: parsing, canonical writing and random generation.

An instance is a JSON object::

    {
      "n_players": 2,
      "dims": [1, 1],
      "blocks": {"1,1": [[1.0]], "1,2": [[0.25]], "2,1": [[0.25]], "2,2": [[1.0]]},
      "feasible_set": {"type": "box", "lower": [1.0, 1.0], "upper": [2.0, 2.0]},
      "solution_set": {"type": "singleton", "point": [1.0, 1.0]},
      "defaults": {"a": 0.5, "r": 1.0}
    }

Block keys ``"l,i"`` are 1-based and hold ``A_li`` (shape ``n_l x n_i``) as
row-major nested lists.  ``feasible_set`` is a ``box`` or a ``polytope``
(``G`` rows and ``h``); ``solution_set`` may be a ``singleton``, ``box`` or
``polytope`` and must certify (VI residual <= 1e-6) for the file to load.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Box, InfeasibleSetError, Polytope, Singleton
from .linalg import lambda_min
from .model import GameError, assemble_C, build_quadratic_game
from .vi import multistart_solution, vi_residual

CERTIFY_TOL = 1e-6
DEFAULT_KEYS = ("a", "r", "epsilon", "tol_sub", "tol_term", "x0", "max_iters")


class InstanceError(ValueError):
    """Malformed instance; the message names the offending field."""


@dataclass
class Instance:
    game: object
    feasible: object
    solution_set: object | None
    defaults: dict
    name: str | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return instance_to_dict(self)


def _err(path, msg):
    return InstanceError(f"field '{path}': {msg}")


def _matrix(value, path):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise _err(path, f"not a numeric matrix ({exc})") from None
    if M.ndim != 2:
        raise _err(path, "expected a row-major array of arrays")
    return M


def _vector(value, path, n=None):
    try:
        v = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise _err(path, f"not a numeric vector ({exc})") from None
    if v.ndim != 1:
        raise _err(path, "expected a flat array of numbers")
    if n is not None and v.size != n:
        raise _err(path, f"expected length {n}, got {v.size}")
    return v


def _set_from_dict(d, n, path):
    if not isinstance(d, dict) or "type" not in d:
        raise _err(path, "expected an object with a 'type'")
    kind = d["type"]
    try:
        if kind == "box":
            return Box(_vector(d.get("lower"), f"{path}.lower", n), _vector(d.get("upper"), f"{path}.upper", n))
        if kind == "polytope":
            G = _matrix(d.get("G"), f"{path}.G")
            if G.shape[1] != n:
                raise _err(f"{path}.G", f"rows must have length {n}")
            return Polytope(G, _vector(d.get("h"), f"{path}.h", G.shape[0]))
        if kind == "singleton":
            return Singleton(_vector(d.get("point"), f"{path}.point", n))
    except InfeasibleSetError as exc:
        raise _err(path, str(exc)) from None
    raise _err(f"{path}.type", f"unknown set type {kind!r}")


def _set_to_dict(S):
    if isinstance(S, Box):
        return {"type": "box", "lower": S.lower.tolist(), "upper": S.upper.tolist()}
    if isinstance(S, Polytope):
        return {"type": "polytope", "G": S.G.tolist(), "h": S.h.tolist()}
    if isinstance(S, Singleton):
        return {"type": "singleton", "point": S.point.tolist()}
    raise TypeError(f"cannot serialize {S!r}")


def parse_instance(data, name=None, certify=True):
    """Build an :class:`Instance` from decoded JSON, validating every field."""
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    for key in ("n_players", "dims", "blocks", "feasible_set"):
        if key not in data:
            raise _err(key, "missing")
    N = data["n_players"]
    if not isinstance(N, int) or N < 1:
        raise _err("n_players", "must be a positive integer")
    dims = data["dims"]
    if not (isinstance(dims, list) and len(dims) == N and all(isinstance(d, int) and d > 0 for d in dims)):
        raise _err("dims", f"must list {N} positive integers")
    if not isinstance(data["blocks"], dict):
        raise _err("blocks", "must be an object keyed 'l,i'")
    warnings = []
    blocks = {}
    for key, value in data["blocks"].items():
        try:
            l, i = (int(p) for p in key.split(","))
        except ValueError:
            raise _err(f"blocks.{key}", "key must look like 'l,i'") from None
        if not (1 <= l <= N and 1 <= i <= N):
            raise _err(f"blocks.{key}", f"player index out of range 1..{N}")
        M = _matrix(value, f"blocks.{key}")
        if M.shape != (dims[l - 1], dims[i - 1]):
            raise _err(f"blocks.{key}", f"shape {M.shape}, expected {(dims[l - 1], dims[i - 1])}")
        blocks[(l - 1, i - 1)] = M
    for l in range(N):
        for i in range(N):
            if (l, i) not in blocks:
                if l == i:
                    raise _err(f"blocks.{l + 1},{i + 1}", "diagonal block is required")
                warnings.append(f"block \"{l + 1},{i + 1}\" missing, treated as zero")
                blocks[(l, i)] = np.zeros((dims[l], dims[i]))
    try:
        game = build_quadratic_game(dims, blocks)
    except GameError as exc:
        raise _err("blocks", str(exc)) from None
    warnings.extend(game.warnings)
    n = game.n
    feasible = _set_from_dict(data["feasible_set"], n, "feasible_set")
    solution = None
    if data.get("solution_set") is not None:
        solution = _set_from_dict(data["solution_set"], n, "solution_set")
        if certify:
            pts = np.asarray(solution.vertices()).reshape(-1, n)
            for p in pts:
                r = vi_residual(game, feasible, p)
                if not feasible.contains(p, 1e-8) or r > CERTIFY_TOL:
                    raise _err("solution_set", f"point {p.tolist()} does not certify (VI residual {r:.3g})")
    defaults = dict(data.get("defaults") or {})
    for key in defaults:
        if key not in DEFAULT_KEYS:
            raise _err(f"defaults.{key}", f"unknown default (allowed: {', '.join(DEFAULT_KEYS)})")
    return Instance(game, feasible, solution, defaults, name, warnings)


def instance_to_dict(inst):
    g = inst.game
    d = {
        "n_players": g.N,
        "dims": list(g.dims),
        "blocks": {f"{l + 1},{i + 1}": g.blocks[(l, i)].tolist() for l in range(g.N) for i in range(g.N)},
        "feasible_set": _set_to_dict(inst.feasible),
    }
    if inst.solution_set is not None:
        d["solution_set"] = _set_to_dict(inst.solution_set)
    if inst.defaults:
        d["defaults"] = dict(inst.defaults)
    return d


def dumps(data):
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def loads(text, name=None):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_instance(data, name=name)


def load_instance(path):
    path = Path(path)
    return loads(path.read_text(), name=path.stem)


def write_instance(inst_or_dict, path=None):
    data = inst_or_dict if isinstance(inst_or_dict, dict) else instance_to_dict(inst_or_dict)
    text = dumps(data)
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# random generation

def _round_up(x, q=1e-6):
    return float(np.ceil(x / q) * q)


def random_blocks(rng, dims, delta_target):
    """Random blocks with ``lambda_min(C + C^T)`` shifted to at least ``delta_target``."""
    N = len(dims)
    blocks = {}
    for l in range(N):
        for i in range(N):
            if l == i:
                B = np.round(rng.normal(scale=0.6, size=(dims[i], dims[i])), 4)
                blocks[(i, i)] = B @ B.T
            else:
                blocks[(l, i)] = np.round(rng.normal(scale=0.5, size=(dims[l], dims[i])), 4)
    C = assemble_C(dims, blocks)
    shift = _round_up(delta_target - lambda_min(C + C.T))
    for i in range(N):
        blocks[(i, i)] = blocks[(i, i)] + shift * np.eye(dims[i])
    return blocks


def generate_instance(players, dim_per_player, seed, delta_floor):
    """Random quadratic instance with ``delta >= delta_floor``.

    The symmetric part of ``C`` is shifted so that ``lambda_min(C + C^T) =
    delta_floor + |slack|``.  With ``delta_floor > 0`` the box excludes the
    origin; with ``delta_floor == 0`` it contains it.  The unique solution
    is computed by extragradient and declared in the file.
    """
    if delta_floor < 0:
        raise ValueError("delta_floor must be nonnegative")
    rng = np.random.default_rng(seed)
    dims = [int(dim_per_player)] * int(players)
    n = sum(dims)
    slack = abs(float(rng.normal(scale=0.25)))
    blocks = random_blocks(rng, dims, delta_floor + slack)
    if delta_floor > 0:
        lower = np.round(rng.uniform(0.5, 1.5, n), 4)
        upper = np.round(lower + rng.uniform(0.5, 1.5, n), 4)
    else:
        lower = -np.round(rng.uniform(0.5, 1.5, n), 4)
        upper = np.round(rng.uniform(0.5, 1.5, n), 4)
    game = build_quadratic_game(dims, blocks)
    box = Box(lower, upper)
    x_star = multistart_solution(game, box, [box.lower, box.upper, 0.5 * (box.lower + box.upper)])
    data = {
        "n_players": len(dims),
        "dims": dims,
        "blocks": {f"{l + 1},{i + 1}": blocks[(l, i)].tolist() for l in range(len(dims)) for i in range(len(dims))},
        "feasible_set": {"type": "box", "lower": lower.tolist(), "upper": upper.tolist()},
        "solution_set": {"type": "singleton", "point": x_star.tolist()},
        "defaults": {"a": max(float(np.floor(game.delta / 2 * 1e6) / 1e6), 1e-6), "r": 1.0},
    }
    return data


def constructed_instance(kind, k):
    """Deterministic instances with a known solution.

    ``kind="sharp"``: the solution is a vertex of the box with ``F(x*)``
    strictly inside the normal cone (weakly sharp).  ``kind="degenerate"``:
    the origin is an interior grid-aligned solution with ``F(x*) = 0``.
    Players: 2 for ``k < 3``, else 3; all dimensions 1.
    """
    if kind not in ("sharp", "degenerate"):
        raise ValueError(f"unknown kind {kind!r}")
    rng = np.random.default_rng((1000 if kind == "sharp" else 2000) + int(k))
    players = 2 if k < 3 else 3
    dims = [1] * players
    n = players
    while True:
        blocks = random_blocks(rng, dims, 0.3 + abs(float(rng.normal(scale=0.2))))
        game = build_quadratic_game(dims, blocks)
        if kind == "degenerate":
            w = float(np.round(rng.uniform(0.05, 0.1), 4))
            m = rng.integers(5, 16, size=n)
            lower, upper = -m * w, (20 - m) * w
            x_star = np.zeros(n)
            break
        signs = rng.choice([-1.0, 1.0], size=n)
        for _ in range(200):
            x_star = np.round(rng.uniform(0.5, 1.5, n), 4)
            if np.all(signs * game.F(x_star) > 0.1):
                break
        else:
            continue
        width = np.round(rng.uniform(0.5, 1.0, n), 4)
        lower = np.where(signs > 0, x_star, x_star - width)
        upper = np.where(signs > 0, x_star + width, x_star)
        break
    return {
        "n_players": players,
        "dims": dims,
        "blocks": {f"{l + 1},{i + 1}": blocks[(l, i)].tolist() for l in range(n) for i in range(n)},
        "feasible_set": {"type": "box", "lower": np.asarray(lower, float).tolist(),
                         "upper": np.asarray(upper, float).tolist()},
        "solution_set": {"type": "singleton", "point": x_star.tolist()},
        "defaults": {"a": float(np.floor(game.delta / 2 * 1e6) / 1e6), "r": 1.0},
    }
