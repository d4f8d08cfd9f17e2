"""Layered parameter system: defaults, experiment overrides, derived values.

Parameter names are camelCase on purpose: they are the keys of the JSON
override documents and of ``parameters.json`` in every run directory, and an
experiment config is just a dict of these keys.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UnknownParameter, ValidationError

MAX_NEURONS_PER_CORE = 1024

WEIGHT_INITS = ("constant", "normal", "lognormal", "anisotropic2d")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

DEFAULT_RULE = "2^-2*x1*y0 - 2^-2*y1*x0 + 2^-4*x1*y1*y0 - 2^-3*y0*w*w"


@dataclass(frozen=True)
class ParameterSet:
    # experiment
    seed: int = 1
    trials: int = 10
    stepsPerTrial: int = 60

    # neurons
    refractoryDelay: int = 2
    voltageTau: float = 100.0
    currentTau: float = 5.0
    thresholdMant: float = 1200.0

    # network; reservoirInSize None means reservoirExSize // 4
    reservoirExSize: int = 400
    reservoirInSize: int | None = None
    reservoirConnPerNeuron: int = 35
    neuronsPerCore: int = 128

    # weights; means are means of the weight magnitudes for every distribution
    weightInit: str = "lognormal"
    weightExMean: float = 12.0
    weightExSigma: float = 0.5
    weightInMean: float = 36.0
    weightInSigma: float = 0.5
    weightFile: str | None = None
    gridWidth: int | None = None
    gridHeight: int | None = None
    anisotropicShift: float = 1.0
    anisotropicSigma: float = 3.0

    # plasticity; weightMax None means twice the initial mean ex->ex weight
    isLearningRule: bool = False
    learningRule: str = DEFAULT_RULE
    traceTauPre: float = 20.0
    traceTauPost: float = 20.0
    traceTauPost2: float = 40.0
    traceImpulse: float = 16.0
    learningEpoch: int = 1
    weightMax: float | None = None

    # input
    inputIsSequence: bool = True
    inputSequenceSize: int = 3
    inputSteps: int = 20
    inputGenSpikeProb: float = 0.8
    inputNumTargetNeurons: int = 40
    inputWeight: float = 500.0
    inputIsTopological: bool = False
    inputSquareSide: int = 4
    inputSquareX: int = 0
    inputSquareY: int = 0
    inputIsLeaveNOut: bool = False
    inputLeaveOutCount: int = 5
    inputIsAlternating: bool = False
    inputRegionCount: int = 2
    generatorsFrozen: bool = False

    # noise
    noiseNeurons: int = 0
    noiseSpikeProb: float = 0.05
    noiseWeight: float = 300.0

    # output
    outputIsPooling: bool = False
    outputSize: int = 8
    outputWeight: float = 100.0

    # probes
    isExSpikeProbe: bool = True
    isInSpikeProbe: bool = True
    isOutSpikeProbe: bool = False
    isWeightProbe: bool = False
    isVoltageProbe: bool = False

    # trial reset
    resetBetweenTrials: bool = True
    resetTraces: bool = True

    # system
    outputDirectory: str = "runs"
    logLevel: str = "INFO"
    plotDimensions: tuple = (900, 500)
    plotRaster: bool = False
    hostThreads: int = 1

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["plotDimensions"] = list(self.plotDimensions)
        return d


@dataclass(frozen=True)
class DerivedParameters:
    reservoirInSize: int
    reservoirSize: int
    totalSteps: int
    coreCount: int
    chunkCount: int
    stepsPerInput: int
    inputWindows: list = field(default_factory=list)
    gridWidth: int | None = None
    gridHeight: int | None = None

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["inputWindows"] = [list(w) for w in self.inputWindows]
        return d


FIELDS = {f.name: f for f in dataclasses.fields(ParameterSet)}

# fields whose default is None
OPTIONAL_TYPES = {
    "reservoirInSize": "int",
    "gridWidth": "int",
    "gridHeight": "int",
    "weightMax": "real",
    "weightFile": "str",
}


def defaults():
    return ParameterSet()


def merge(base, overrides):
    """Return ``base`` with every key of ``overrides`` replaced.

    Raises UnknownParameter on the first key that is not a parameter name.
    """
    overrides = dict(overrides or {})
    for key in overrides:
        if key not in FIELDS:
            raise UnknownParameter(key)
    if "plotDimensions" in overrides and overrides["plotDimensions"] is not None:
        overrides["plotDimensions"] = tuple(overrides["plotDimensions"])
    return dataclasses.replace(base, **overrides)


def in_size(p):
    if p.reservoirInSize is None:
        return max(1, p.reservoirExSize // 4) if isinstance(p.reservoirExSize, int) else 1
    return p.reservoirInSize


def grid_shape(p):
    """(width, height) of the excitatory sheet, or None when not inferable."""
    if p.gridWidth is not None and p.gridHeight is not None:
        return p.gridWidth, p.gridHeight
    side = math.isqrt(p.reservoirExSize)
    if p.gridWidth is None and p.gridHeight is None and side * side == p.reservoirExSize:
        return side, side
    if p.gridWidth is not None and p.reservoirExSize % p.gridWidth == 0:
        return p.gridWidth, p.reservoirExSize // p.gridWidth
    if p.gridHeight is not None and p.reservoirExSize % p.gridHeight == 0:
        return p.reservoirExSize // p.gridHeight, p.gridHeight
    return None


def input_windows(p):
    """Per-trial [start, end) windows of the configured input mode."""
    if p.inputIsSequence:
        return [(k * p.inputSteps, (k + 1) * p.inputSteps) for k in range(p.inputSequenceSize)]
    if p.inputIsTopological or p.inputIsLeaveNOut or p.inputIsAlternating:
        return [(0, p.inputSteps)]
    return []


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_real(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def validate(p):
    """Return the list of violated invariants; empty means valid."""
    v = []

    def need(cond, msg):
        if not cond:
            v.append(msg)

    for name, f in FIELDS.items():
        val = getattr(p, name)
        default = f.default
        if val is None:
            if default is not None:
                v.append(f"{name}: must not be null")
            continue
        if default is None:
            kind = OPTIONAL_TYPES[name]
            ok = {"int": _is_int, "real": _is_real, "str": lambda x: isinstance(x, str)}[kind](val)
            need(ok, f"{name}: expected {kind} or null, got {val!r}")
            continue
        if isinstance(default, bool):
            need(isinstance(val, bool), f"{name}: expected boolean, got {val!r}")
        elif _is_int(default):
            need(_is_int(val), f"{name}: expected integer, got {val!r}")
        elif isinstance(default, float):
            need(_is_real(val), f"{name}: expected number, got {val!r}")
        elif isinstance(default, str):
            need(isinstance(val, str), f"{name}: expected string, got {val!r}")
        elif isinstance(default, tuple):
            need(isinstance(val, (tuple, list)), f"{name}: expected a list, got {val!r}")
    if v:
        # later checks assume well-typed values
        return v

    need(p.seed >= 0, "seed: must be non-negative")
    need(p.trials >= 1, "trials: must be >= 1")
    need(p.stepsPerTrial >= 1, "stepsPerTrial: must be >= 1")
    need(p.refractoryDelay >= 0, "refractoryDelay: must be non-negative")
    for name in ("voltageTau", "currentTau", "traceTauPre", "traceTauPost", "traceTauPost2"):
        # the linear decay 1 - 1/tau is only a decay for tau >= 1
        need(getattr(p, name) >= 1, f"{name}: tau must be >= 1 timestep")
    need(p.thresholdMant > 0, "thresholdMant: must be positive")
    need(p.reservoirExSize >= 1, "reservoirExSize: must be positive")
    n_in = in_size(p)
    need(_is_int(n_in) and n_in >= 1, "reservoirInSize: must be positive")
    n = p.reservoirExSize + n_in
    need(p.reservoirConnPerNeuron >= 0, "reservoirConnPerNeuron: must be non-negative")
    need(p.reservoirConnPerNeuron < n,
         "reservoirConnPerNeuron: must be < reservoirExSize + reservoirInSize")
    need(1 <= p.neuronsPerCore <= MAX_NEURONS_PER_CORE,
         f"neuronsPerCore: must be in [1, {MAX_NEURONS_PER_CORE}]")

    need(p.weightInit in WEIGHT_INITS, f"weightInit: must be one of {', '.join(WEIGHT_INITS)}")
    need(p.weightExMean > 0, "weightExMean: must be positive")
    need(p.weightInMean > 0, "weightInMean: must be positive")
    need(p.weightExSigma >= 0, "weightExSigma: must be non-negative")
    need(p.weightInSigma >= 0, "weightInSigma: must be non-negative")
    if p.weightInit == "lognormal" or p.weightInit == "normal":
        need(p.weightExSigma > 0 and p.weightInSigma > 0,
             f"weight sigma: must be positive for {p.weightInit} weights")
    if p.weightInit == "anisotropic2d" and p.weightFile is None:
        need(grid_shape(p) is not None and math.prod(grid_shape(p)) == p.reservoirExSize,
             "gridWidth x gridHeight: must equal reservoirExSize")
        need(p.anisotropicSigma > 0, "anisotropicSigma: must be positive")
        need(p.anisotropicShift >= 0, "anisotropicShift: must be non-negative")
    if p.weightMax is not None:
        need(p.weightMax > 0, "weightMax: must be positive")

    need(p.traceImpulse > 0, "traceImpulse: must be positive")
    need(p.learningEpoch >= 1, "learningEpoch: must be >= 1")

    for name in ("inputGenSpikeProb", "noiseSpikeProb"):
        need(0.0 <= getattr(p, name) <= 1.0, f"{name}: probability out of range [0, 1]")

    modes = [p.inputIsSequence, p.inputIsTopological, p.inputIsLeaveNOut, p.inputIsAlternating]
    need(sum(modes) <= 1, "input: at most one input mode may be enabled")
    need(p.inputSteps >= 1, "inputSteps: must be >= 1")
    need(p.inputNumTargetNeurons >= 1, "inputNumTargetNeurons: must be positive")
    need(p.inputNumTargetNeurons <= p.reservoirExSize,
         "inputNumTargetNeurons: must be <= reservoirExSize")
    if p.inputIsSequence:
        need(p.inputSequenceSize >= 1, "inputSequenceSize: must be >= 1")
        need(p.inputSequenceSize * p.inputSteps <= p.stepsPerTrial,
             "inputSequenceSize x inputSteps: must be <= stepsPerTrial")
        need(p.inputSequenceSize * p.inputNumTargetNeurons <= p.reservoirExSize,
             "inputSequenceSize x inputNumTargetNeurons: sequence sets must fit in reservoirExSize")
    elif any(modes):
        need(p.inputSteps <= p.stepsPerTrial, "inputSteps: must be <= stepsPerTrial")
    if p.inputIsTopological:
        g = grid_shape(p)
        need(g is not None and math.prod(g) == p.reservoirExSize,
             "gridWidth x gridHeight: must equal reservoirExSize for topological input")
        need(p.inputSquareSide >= 1, "inputSquareSide: must be positive")
        if g is not None:
            need(p.inputSquareX >= 0 and p.inputSquareY >= 0
                 and p.inputSquareX + p.inputSquareSide <= g[0]
                 and p.inputSquareY + p.inputSquareSide <= g[1],
                 "inputSquare: square does not fit in the grid")
    if p.inputIsLeaveNOut:
        need(0 <= p.inputLeaveOutCount < p.inputNumTargetNeurons,
             "inputLeaveOutCount: must be in [0, inputNumTargetNeurons)")
    if p.inputIsAlternating:
        need(p.inputRegionCount >= 2, "inputRegionCount: must be >= 2")
        need(p.inputRegionCount * p.inputNumTargetNeurons <= p.reservoirExSize,
             "inputRegionCount x inputNumTargetNeurons: regions must fit in reservoirExSize")

    need(0 <= p.noiseNeurons <= n, "noiseNeurons: must be in [0, reservoirSize]")
    need(p.outputSize >= 1, "outputSize: must be positive")
    need(p.outputSize <= p.reservoirExSize, "outputSize: must be <= reservoirExSize")
    need(p.logLevel in LOG_LEVELS, f"logLevel: must be one of {', '.join(LOG_LEVELS)}")
    need(len(p.plotDimensions) == 2 and all(_is_real(d) and d > 0 for d in p.plotDimensions),
         "plotDimensions: must be two positive numbers")
    need(p.hostThreads >= 1, "hostThreads: must be >= 1")
    return v


def derive(p):
    violations = validate(p)
    if violations:
        raise ValidationError(violations)
    n_in = in_size(p)
    n = p.reservoirExSize + n_in
    cores = math.ceil(n / p.neuronsPerCore)
    g = grid_shape(p)
    return DerivedParameters(
        reservoirInSize=n_in,
        reservoirSize=n,
        totalSteps=p.trials * p.stepsPerTrial,
        coreCount=cores,
        chunkCount=cores * cores,
        stepsPerInput=p.inputSteps if p.inputIsSequence else 0,
        inputWindows=input_windows(p),
        gridWidth=g[0] if g else None,
        gridHeight=g[1] if g else None,
    )


def load_overrides(path):
    """Read an override document.

    Accepts a flat ``{name: value}`` document or a ``parameters.json`` dump
    written by a previous run (its ``parameters`` section is used).
    """
    with open(Path(path)) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    if "parameters" in doc and isinstance(doc["parameters"], dict):
        doc = doc["parameters"]
    return doc


def dump(p, derived, path):
    with open(Path(path), "w") as fh:
        json.dump({"parameters": p.to_dict(), "derived": derived.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
