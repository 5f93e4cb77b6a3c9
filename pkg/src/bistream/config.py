"""Run configuration (INI syntax, read with :mod:`configparser`).

Grammar::

    [run]
    seed = 42                      ; optional, 64-bit integer
    input = records.jsonl          ; optional, '-' for stdin
    output = events.jsonl          ; optional, '-' for stdout

    [attribute income]             ; one section per attribute, in schema order
    kind = numeric                 ; numeric | categorical
    setting = iii                  ; i | ii | iii preset for lambda and transforms
    lambda = random                ; random | a number strictly inside (0, 1)
    transforms = 2-10              ; n  or  lo-hi
    matrix = 0.8 0.2; 0.2 0.8      ; inline dense rows separated by ';'
    matrix_file = seed.txt         ; or a file in the dense text format
    target_beta = 0.72             ; or generate a matrix reaching this beta ...
    size = 2                       ; ... of this size (numeric only)

    [attribute region]
    kind = categorical
    labels = north, south, east
    matrix = ...                   ; or matrix_file / target_beta (size = #labels)
    on_unknown = expand            ; expand | reject
    expand_lambda = 0.5
    expand_transforms = 1
    expand_target = north          ; optional; random existing label when absent

A numeric attribute without any matrix source uses the 2x2 matrix with 0.8
on the diagonal.  Generated matrices draw from the substream
``derive(seed, "gen-matrix:<attribute>")``.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .experiments import gen_matrix
from .matrix import TransitionMatrix, from_dense, parse_dense_text
from .multi import AttributeSpec
from .rng import derive
from .stream import SETTINGS, Policy

SECTION_PREFIX = "attribute "


@dataclass
class AttributeConfig:
    name: str
    kind: str = "numeric"
    lam: float | None = None
    transforms: tuple[int, int] = (1, 1)
    matrix_text: str | None = None
    target_beta: float | None = None
    size: int | None = None
    labels: list[str] | None = None
    on_unknown: str = "expand"
    expand_lambda: float = 0.5
    expand_transforms: int = 1
    expand_target: str | None = None

    def build(self, seed: int) -> AttributeSpec:
        matrix = self._matrix(seed)
        if self.kind == "numeric":
            return AttributeSpec(
                self.name, "numeric", policy=Policy(lam=self.lam, transforms=self.transforms), seed_matrix=matrix
            )
        return AttributeSpec(
            self.name, "categorical", seed_matrix=matrix, labels=self.labels,
            on_unknown=self.on_unknown, expand_lambda=self.expand_lambda,
            expand_transforms=self.expand_transforms, expand_target=self.expand_target,
        )

    def _matrix(self, seed: int) -> TransitionMatrix | None:
        if self.matrix_text is not None:
            return from_dense(parse_dense_text(self.matrix_text))
        if self.target_beta is not None:
            r = len(self.labels) if self.kind == "categorical" else (self.size or 2)
            m, _ = gen_matrix(r, self.target_beta, derive(seed, f"gen-matrix:{self.name}"))
            return m
        if self.kind == "categorical":
            raise ConfigError(f"categorical attribute {self.name!r} needs matrix, matrix_file or target_beta")
        return None


@dataclass
class RunConfig:
    seed: int | None = None
    attributes: list[AttributeConfig] = field(default_factory=list)
    input: str | None = None
    output: str | None = None

    def specs(self, seed: int) -> list[AttributeSpec]:
        if not self.attributes:
            raise ConfigError("configuration declares no attribute")
        return [a.build(seed) for a in self.attributes]


def parse_transforms(text: str) -> tuple[int, int]:
    text = text.strip()
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return int(lo), int(hi)
        n = int(text)
        return n, n
    except ValueError:
        raise ConfigError(f"transforms must be 'n' or 'lo-hi', got {text!r}") from None


def parse_lambda(text: str) -> float | None:
    text = text.strip()
    if text == "random":
        return None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"lambda must be 'random' or a number, got {text!r}") from None


def load_config(text: str, base_dir: Path | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    base_dir = base_dir or Path.cwd()
    cfg = RunConfig()
    if cp.has_section("run"):
        run = cp["run"]
        if "seed" in run:
            cfg.seed = int(run["seed"], 0)
        cfg.input = run.get("input")
        cfg.output = run.get("output")
    for section in cp.sections():
        if section == "run":
            continue
        if not section.startswith(SECTION_PREFIX):
            raise ConfigError(f"unknown section [{section}]")
        cfg.attributes.append(_attribute(section[len(SECTION_PREFIX):].strip(), cp[section], base_dir))
    return cfg


def _attribute(name: str, sec, base_dir: Path) -> AttributeConfig:
    kind = sec.get("kind", "numeric").strip()
    if kind not in ("numeric", "categorical"):
        raise ConfigError(f"attribute {name!r}: kind must be numeric or categorical")
    a = AttributeConfig(name=name, kind=kind)
    if "setting" in sec:
        pol = SETTINGS[sec["setting"].strip()]
        a.lam, a.transforms = pol.lam, pol.transforms
    if "lambda" in sec:
        a.lam = parse_lambda(sec["lambda"])
    if "transforms" in sec:
        a.transforms = parse_transforms(sec["transforms"])
    if "matrix" in sec:
        a.matrix_text = "\n".join(row.strip() for row in sec["matrix"].split(";"))
    if "matrix_file" in sec:
        a.matrix_text = (base_dir / sec["matrix_file"].strip()).read_text()
    if "target_beta" in sec:
        a.target_beta = float(sec["target_beta"])
    if "size" in sec:
        a.size = int(sec["size"])
    if "labels" in sec:
        a.labels = [lab.strip() for lab in sec["labels"].split(",") if lab.strip()]
    if kind == "categorical" and not a.labels:
        raise ConfigError(f"categorical attribute {name!r} needs labels")
    a.on_unknown = sec.get("on_unknown", a.on_unknown).strip()
    a.expand_lambda = float(sec.get("expand_lambda", a.expand_lambda))
    a.expand_transforms = int(sec.get("expand_transforms", a.expand_transforms))
    a.expand_target = sec.get("expand_target", None)
    return a


def default_config(attr: str = "value", setting: str | None = None) -> RunConfig:
    """Single numeric attribute, 2x2 seed, policy from ``setting`` (default: i)."""
    pol = SETTINGS[setting or "i"]
    return RunConfig(attributes=[AttributeConfig(name=attr, lam=pol.lam, transforms=pol.transforms)])
