"""Parameter files: curve constants and bit layout in one JSON document.

Integers that can exceed 53 bits are decimal strings. Two profiles ship
with the package: ``toy`` (q = 2^13 - 1) and ``production`` (q = 2^127 - 1).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .codec import BitLayout, NonceCodec
from .errors import ParameterError
from .field_curve import Curve, CurveParams

BUILTIN = ("toy", "production")


@dataclass(frozen=True)
class Profile:
    curve_params: CurveParams
    layout: BitLayout
    backend: Optional[str] = None

    @property
    def name(self) -> str:
        return self.curve_params.name

    @property
    def is_toy(self) -> bool:
        return self.curve_params.q.bit_length() < 64

    @cached_property
    def curve(self) -> Curve:
        return Curve(self.curve_params, self.backend)

    @cached_property
    def codec(self) -> NonceCodec:
        return NonceCodec(self.curve, self.layout)

    def with_layout(self, m_d: int, m_i: int, m_t: int) -> "Profile":
        return replace(self, layout=BitLayout(m_d, m_i, m_t, self.layout.pad_bits))

    def problems(self) -> list[str]:
        out = self.curve.problems()
        out += self.layout.problems(self.curve.bit_len, toy=self.is_toy)
        if self.layout.pad_bits != self.curve_params.pad_bits:
            out.append("layout pad_bits differs from curve pad_bits")
        return out


def from_dict(d: dict, backend: Optional[str] = None) -> Profile:
    try:
        order = d.get("order_hint")
        params = CurveParams(
            q=int(d["q"]), a=int(d["a"]), b=int(d["b"]),
            gen=(int(d["gen_x"]), int(d["gen_y"])),
            order_hint=int(order) if order not in (None, "") else None,
            pad_bits=int(d["pad_bits"]), name=str(d.get("name", "custom")),
        )
        layout = BitLayout(int(d["m_d"]), int(d["m_i"]), int(d["m_t"]), params.pad_bits)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed parameter file: {exc}") from exc
    return Profile(params, layout, backend)


def to_dict(profile: Profile) -> dict:
    p = profile.curve_params
    return {
        "name": p.name, "q": str(p.q), "a": str(p.a), "b": str(p.b),
        "gen_x": str(p.gen[0]), "gen_y": str(p.gen[1]),
        "order_hint": None if p.order_hint is None else str(p.order_hint),
        "pad_bits": p.pad_bits, "m_d": profile.layout.m_d,
        "m_i": profile.layout.m_i, "m_t": profile.layout.m_t,
    }


def load(name_or_path: Union[str, Path], backend: Optional[str] = None) -> Profile:
    """Load a built-in profile by name or a parameter file by path."""
    if str(name_or_path) in BUILTIN:
        text = resources.files(__package__).joinpath(
            f"profiles/{name_or_path}.json").read_text()
    else:
        try:
            text = Path(name_or_path).read_text()
        except OSError as exc:
            raise ParameterError(f"cannot read {name_or_path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{name_or_path} is not valid JSON: {exc}") from exc
    return from_dict(data, backend)
