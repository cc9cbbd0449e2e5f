"""Finite-trace universe: ports, runs, and the assertion algebra.

A system is a set of named finite-domain ports observed over a fixed
number of discrete steps (the horizon).  A run assigns one value per
(port, step); an assertion is a set of runs over a signature, stored as
a boolean mask over the canonical run index.

Canonical run index
-------------------
Runs are numbered little-endian mixed-radix over (port, step) slots:
ports in lexicographic name order, steps ascending within a port, digit
= position of the value in the port's declared domain.  Slot 0 is the
least significant digit.  This index is the normative serialization of
run sets (see docs/format.md) and everything here round-trips through it
bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import kernels
from .errors import (
    CapacityError,
    DomainMismatchError,
    HorizonMismatchError,
    PctError,
    RoleConflictError,
    SignatureError,
)

BOOL = (False, True)

_enum_cap = 2**24


def enumeration_cap() -> int:
    return _enum_cap


def set_enumeration_cap(n: int) -> None:
    """Cap on the size of any enumerated run space (default 2**24)."""
    global _enum_cap
    if n < 1:
        raise ValueError("enumeration cap must be positive")
    _enum_cap = n


def same_domain(d1: tuple, d2: tuple) -> bool:
    """Value-and-type equality; bool and int values never match each other."""
    return len(d1) == len(d2) and all(type(a) is type(b) and a == b
                                      for a, b in zip(d1, d2))


def domain_index(domain: tuple, value) -> int:
    """Position of a value in a domain, matching type as well as value."""
    for i, v in enumerate(domain):
        if type(v) is type(value) and v == value:
            return i
    raise PctError(f"value {value!r} not in domain {domain}")


@dataclass(frozen=True, eq=False)
class Port:
    """A named channel with an ordered finite value domain."""

    name: str
    domain: tuple = BOOL

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise PctError("port name must be a non-empty string")
        dom = tuple(self.domain)
        object.__setattr__(self, "domain", dom)
        if len(dom) < 1:
            raise PctError(f"port {self.name}: domain must have at least one value")
        if len(set(dom)) != len(dom):
            raise PctError(f"port {self.name}: domain values must be distinct")

    def __eq__(self, other):
        return (isinstance(other, Port) and self.name == other.name
                and same_domain(self.domain, other.domain))

    def __hash__(self):
        return hash((self.name, self.domain))

    @property
    def is_boolean(self) -> bool:
        return same_domain(self.domain, BOOL)

    def renamed(self, new_name: str) -> "Port":
        return Port(new_name, self.domain)


@dataclass(frozen=True)
class Horizon:
    """Number of discrete steps shared by every run of a system."""

    length: int

    def __post_init__(self):
        if not isinstance(self.length, int) or self.length < 1:
            raise PctError("horizon must be a positive integer")


def _hlen(h) -> int:
    if isinstance(h, Horizon):
        return h.length
    return Horizon(h).length


@dataclass(frozen=True)
class History:
    """The value sequence of a single port over the horizon."""

    port: Port
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        for v in vals:
            domain_index(self.port.domain, v)
        if len(vals) < 1:
            raise PctError("history must cover at least one step")


@dataclass(frozen=True)
class Run:
    """One history per port, keyed by port name (name-sorted entries)."""

    entries: tuple

    @classmethod
    def of(cls, assignments: Mapping[str, Iterable]) -> "Run":
        items = tuple(sorted((name, tuple(vals)) for name, vals in assignments.items()))
        return cls(items)

    @property
    def assignments(self) -> dict:
        return dict(self.entries)

    def history(self, name: str) -> tuple:
        for n, vals in self.entries:
            if n == name:
                return vals
        raise KeyError(name)

    def restricted(self, names: Iterable[str]) -> "Run":
        keep = set(names)
        return Run(tuple((n, v) for n, v in self.entries if n in keep))

    def merged(self, other: "Run") -> "Run":
        d = dict(self.entries)
        for n, v in other.entries:
            if n in d and d[n] != v:
                raise PctError(f"conflicting histories for port {n}")
            d[n] = v
        return Run.of(d)

    def renamed(self, old: str, new: str) -> "Run":
        d = dict(self.entries)
        if old in d:
            d[new] = d.pop(old)
        return Run.of(d)


@dataclass(frozen=True)
class Signature:
    """Ports of a component, split into controlled and uncontrolled sets."""

    ports: tuple
    controlled: frozenset
    uncontrolled: frozenset

    @classmethod
    def of(cls, controlled: Iterable[Port] = (), uncontrolled: Iterable[Port] = ()) -> "Signature":
        c, u = tuple(controlled), tuple(uncontrolled)
        names = [p.name for p in c] + [p.name for p in u]
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate port names in signature: {sorted(names)}")
        ports = tuple(sorted(c + u, key=lambda p: p.name))
        return cls(ports, frozenset(p.name for p in c), frozenset(p.name for p in u))

    def __post_init__(self):
        names = frozenset(p.name for p in self.ports)
        if self.controlled & self.uncontrolled:
            raise SignatureError("controlled and uncontrolled port sets overlap")
        if self.controlled | self.uncontrolled != names:
            raise SignatureError("controlled/uncontrolled split must cover exactly the ports")

    @property
    def names(self) -> tuple:
        return tuple(p.name for p in self.ports)

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise SignatureError(f"no port named {name!r} in signature")

    def __contains__(self, name: str) -> bool:
        return any(p.name == name for p in self.ports)

    def role(self, name: str) -> str:
        if name in self.controlled:
            return "controlled"
        if name in self.uncontrolled:
            return "uncontrolled"
        raise SignatureError(f"no port named {name!r} in signature")

    def restricted(self, names: Iterable[str]) -> "Signature":
        keep = set(names)
        missing = keep - set(self.names)
        if missing:
            raise SignatureError(f"ports not in signature: {sorted(missing)}")
        ports = tuple(p for p in self.ports if p.name in keep)
        return Signature(ports, self.controlled & keep, self.uncontrolled & keep)

    def renamed(self, old: str, new: str) -> "Signature":
        if old not in self:
            raise SignatureError(f"no port named {old!r} in signature")
        if new in self:
            raise SignatureError(f"port name {new!r} already taken")
        ports = tuple(sorted((p.renamed(new) if p.name == old else p for p in self.ports),
                             key=lambda p: p.name))
        ren = lambda s: frozenset(new if n == old else n for n in s)
        return Signature(ports, ren(self.controlled), ren(self.uncontrolled))


def _check_shared_domains(s1: Signature, s2: Signature) -> None:
    for p in s1.ports:
        if p.name in s2 and not same_domain(s2.port(p.name).domain, p.domain):
            raise DomainMismatchError(
                f"port {p.name}: domains differ ({p.domain} vs {s2.port(p.name).domain})")


def _check_shared_roles(s1: Signature, s2: Signature) -> None:
    for p in s1.ports:
        if p.name in s2 and s2.role(p.name) != s1.role(p.name):
            raise RoleConflictError(
                f"port {p.name} is {s1.role(p.name)} on one side and {s2.role(p.name)} on the other")


def union_signature(s1: Signature, s2: Signature) -> Signature:
    """Union requiring shared ports to agree on domain and role."""
    _check_shared_domains(s1, s2)
    _check_shared_roles(s1, s2)
    ports = {p.name: p for p in s1.ports}
    ports.update({p.name: p for p in s2.ports})
    c = s1.controlled | s2.controlled
    return Signature(tuple(sorted(ports.values(), key=lambda p: p.name)),
                     frozenset(c), frozenset(ports) - c)


def merge_signature_controlled(s1: Signature, s2: Signature) -> Signature:
    """Union where control wins: a port controlled on either side is controlled.

    This is the contract-level resolution; plain assertion products refuse
    role conflicts instead.
    """
    _check_shared_domains(s1, s2)
    ports = {p.name: p for p in s1.ports}
    ports.update({p.name: p for p in s2.ports})
    c = s1.controlled | s2.controlled
    return Signature(tuple(sorted(ports.values(), key=lambda p: p.name)),
                     frozenset(c), frozenset(ports) - c)


def is_subsignature(s1: Signature, s2: Signature) -> bool:
    """True when s2 extends s1 with agreeing domains and roles."""
    try:
        for p in s1.ports:
            q = s2.port(p.name)
            if not same_domain(q.domain, p.domain) or s2.role(p.name) != s1.role(p.name):
                return False
    except SignatureError:
        return False
    return True


# --- index space ------------------------------------------------------------

@dataclass(frozen=True)
class _Space:
    ports: tuple          # name-sorted
    horizon: int
    radices: tuple        # one per slot, port-major then step
    strides: tuple
    size: int

    def slot(self, name: str, step: int) -> int:
        for i, p in enumerate(self.ports):
            if p.name == name:
                return i * self.horizon + step
        raise SignatureError(f"no port named {name!r}")

    def np_strides(self) -> np.ndarray:
        return np.asarray(self.strides, dtype=np.int64)


@lru_cache(maxsize=512)
def _space(ports: tuple, horizon: int) -> _Space:
    radices = []
    for p in ports:
        radices.extend([len(p.domain)] * horizon)
    size = 1
    strides = []
    for r in radices:
        strides.append(size)
        size *= r
    return _Space(ports, horizon, tuple(radices), tuple(strides), size)


def space_of(sig: Signature, h) -> _Space:
    space = _space(sig.ports, _hlen(h))
    if space.size > _enum_cap:
        raise CapacityError(
            f"run space has {space.size} points, above the enumeration cap {_enum_cap}")
    return space


@lru_cache(maxsize=256)
def _restrict_map_cached(src_ports: tuple, dst_ports: tuple, horizon: int,
                         pairing: tuple) -> np.ndarray:
    src = _space(src_ports, horizon)
    dst = _space(dst_ports, horizon)
    src_strides, src_radices, dst_strides = [], [], []
    for dst_slot, src_slot in pairing:
        src_strides.append(src.strides[src_slot])
        src_radices.append(src.radices[src_slot])
        dst_strides.append(dst.strides[dst_slot])
    out = kernels.mixed_radix_map(src.size, src_strides, src_radices, dst_strides)
    out.setflags(write=False)
    return out


def _restrict_map(src: _Space, dst: _Space, name_map=None) -> np.ndarray:
    """src index -> dst index keeping only dst's slots.

    ``name_map`` maps a dst port name to the src port name carrying its
    digits (defaults to the identity), which also covers renamings.
    """
    pairing = []
    h = dst.horizon
    for j, p in enumerate(dst.ports):
        src_name = name_map.get(p.name, p.name) if name_map else p.name
        base = src.slot(src_name, 0)
        for t in range(h):
            pairing.append((j * h + t, base + t))
    return _restrict_map_cached(src.ports, dst.ports, h, tuple(pairing))


# --- assertions ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Assertion:
    """A set of runs over a signature at a fixed horizon."""

    signature: Signature
    horizon: int
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        space = space_of(self.signature, self.horizon)
        if self.mask.dtype != bool or self.mask.shape != (space.size,):
            raise PctError("assertion mask must be a boolean vector over the run space")
        self.mask.setflags(write=False)

    @property
    def space(self) -> _Space:
        return space_of(self.signature, self.horizon)

    def __eq__(self, other):
        return (isinstance(other, Assertion)
                and self.signature == other.signature
                and self.horizon == other.horizon
                and np.array_equal(self.mask, other.mask))

    def __len__(self) -> int:
        return int(self.mask.sum())

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    def __iter__(self) -> Iterator[Run]:
        return runs(self)


def _make(sig: Signature, h: int, mask: np.ndarray) -> Assertion:
    return Assertion(sig, h, mask)


def universe(sig: Signature, h) -> Assertion:
    """Every well-formed run over the signature at the horizon."""
    hh = _hlen(h)
    space = space_of(sig, hh)
    return _make(sig, hh, np.ones(space.size, dtype=bool))


def empty(sig: Signature, h) -> Assertion:
    hh = _hlen(h)
    space = space_of(sig, hh)
    return _make(sig, hh, np.zeros(space.size, dtype=bool))


def universe_size(sig: Signature, h) -> int:
    return math.prod(len(p.domain) ** _hlen(h) for p in sig.ports)


def run_index(sig: Signature, h, run: Run) -> int:
    """Canonical index of a run (little-endian mixed radix, see module doc)."""
    hh = _hlen(h)
    space = space_of(sig, hh)
    d = dict(run.entries)
    if set(d) != set(sig.names):
        raise SignatureError(
            f"run assigns ports {sorted(d)} but signature has {sorted(sig.names)}")
    idx = 0
    slot = 0
    for p in space.ports:
        vals = d[p.name]
        if len(vals) != hh:
            raise HorizonMismatchError(f"history of {p.name} has length {len(vals)}, expected {hh}")
        for t in range(hh):
            idx += domain_index(p.domain, vals[t]) * space.strides[slot]
            slot += 1
    return idx


def run_at(sig: Signature, h, index: int) -> Run:
    """Inverse of run_index."""
    hh = _hlen(h)
    space = space_of(sig, hh)
    if not 0 <= index < space.size:
        raise PctError(f"run index {index} out of range [0, {space.size})")
    d = {}
    slot = 0
    for p in space.ports:
        vals = []
        for _ in range(hh):
            vals.append(p.domain[(index // space.strides[slot]) % space.radices[slot]])
            slot += 1
        d[p.name] = tuple(vals)
    return Run.of(d)


def from_runs(sig: Signature, h, rs: Iterable[Run]) -> Assertion:
    hh = _hlen(h)
    space = space_of(sig, hh)
    mask = np.zeros(space.size, dtype=bool)
    for r in rs:
        mask[run_index(sig, hh, r)] = True
    return _make(sig, hh, mask)


def from_indices(sig: Signature, h, indices: Iterable[int]) -> Assertion:
    hh = _hlen(h)
    space = space_of(sig, hh)
    mask = np.zeros(space.size, dtype=bool)
    idx = np.fromiter(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= space.size):
        raise PctError("run index out of range")
    mask[idx] = True
    return _make(sig, hh, mask)


def runs(e: Assertion) -> Iterator[Run]:
    for i in np.nonzero(e.mask)[0]:
        yield run_at(e.signature, e.horizon, int(i))


def _require_same_horizon(e1: Assertion, e2: Assertion) -> None:
    if e1.horizon != e2.horizon:
        raise HorizonMismatchError(f"horizons differ: {e1.horizon} vs {e2.horizon}")


def lift(e: Assertion, sig2: Signature) -> Assertion:
    """Inverse projection: all runs over sig2 whose restriction lies in e."""
    if not is_subsignature(e.signature, sig2):
        raise SignatureError("lift target must extend the assertion's signature "
                             "with agreeing domains and roles")
    if sig2 == e.signature:
        return e
    big = space_of(sig2, e.horizon)
    rmap = _restrict_map(big, e.space)
    return _make(sig2, e.horizon, e.mask[rmap])


def project(e: Assertion, sig2: Signature) -> Assertion:
    """Image of the runs under restriction to sig2's ports."""
    if not is_subsignature(sig2, e.signature):
        raise SignatureError("projection target must be a sub-signature")
    if sig2 == e.signature:
        return e
    small = space_of(sig2, e.horizon)
    rmap = _restrict_map(e.space, small)
    return _make(sig2, e.horizon, kernels.group_any(rmap, e.mask, small.size))


def complement(e: Assertion) -> Assertion:
    return _make(e.signature, e.horizon, ~e.mask)


def product(e1: Assertion, e2: Assertion) -> Assertion:
    """Intersection over the union signature.

    Shared ports must agree on domain and role; resolving a
    controlled/uncontrolled conflict is a contract-level concern and is
    refused here.
    """
    _require_same_horizon(e1, e2)
    sig = union_signature(e1.signature, e2.signature)
    m1 = lift(e1, sig)
    m2 = lift(e2, sig)
    return _make(sig, e1.horizon, m1.mask & m2.mask)


def intersect(e1: Assertion, e2: Assertion) -> Assertion:
    return product(e1, e2)


def union(e1: Assertion, e2: Assertion) -> Assertion:
    _require_same_horizon(e1, e2)
    sig = union_signature(e1.signature, e2.signature)
    m1 = lift(e1, sig)
    m2 = lift(e2, sig)
    return _make(sig, e1.horizon, m1.mask | m2.mask)


def included_in(e1: Assertion, e2: Assertion, sig: Signature) -> bool:
    """Signature-relative inclusion: lift both to sig and compare."""
    _require_same_horizon(e1, e2)
    m1 = lift(e1, sig)
    m2 = lift(e2, sig)
    return not bool((m1.mask & ~m2.mask).any())


def relabel(e: Assertion, sig2: Signature) -> Assertion:
    """Swap the signature for one with identical ports but different roles."""
    if e.signature.ports != sig2.ports:
        raise SignatureError("relabel requires identical ports and domains")
    return _make(sig2, e.horizon, e.mask)


def renamed(e: Assertion, old: str, new: str) -> Assertion:
    """Rename a port; the run set is carried across (index order may change)."""
    sig2 = e.signature.renamed(old, new)
    dst = space_of(sig2, e.horizon)
    # for each index of the renamed space, the index it came from
    back = _restrict_map(dst, e.space, name_map={old: new})
    return _make(sig2, e.horizon, e.mask[back])


def slot_values(sig: Signature, h, name: str, step: int) -> np.ndarray:
    """Domain-position digit of (port, step) for every run index (read-only)."""
    hh = _hlen(h)
    space = space_of(sig, hh)
    slot = space.slot(name, step)
    out = kernels.mixed_radix_map(space.size, [space.strides[slot]],
                                  [space.radices[slot]], [1])
    out.setflags(write=False)
    return out


def from_step_predicate(sig: Signature, h, pred) -> Assertion:
    """Runs satisfying ``pred(values_of)`` at every step.

    ``pred`` receives a step index and a lookup ``name -> digit array`` and
    returns a boolean array over the run space.
    """
    hh = _hlen(h)
    space = space_of(sig, hh)
    mask = np.ones(space.size, dtype=bool)
    for t in range(hh):
        lookup = lambda name, t=t: slot_values(sig, hh, name, t)
        mask &= pred(t, lookup)
    return _make(sig, hh, mask)
