"""Experiment lifecycle: resolve parameters, build the network, run trials.

An experiment is a parameter set plus optional hooks::

    exp = Experiment("random-network-sequence-learning", {"seed": 2})
    exp.build()
    exp.run()
    exp.net.datasets.raster      # (reservoirSize, totalSteps) bool

Hooks receive the experiment and fire once each: ``onInit`` at the end of
construction (pass those via ``hooks=``), ``afterBuild`` once every network
part is connected, ``afterRun`` once the probes are post-processed and the
run directory is written.
"""

from __future__ import annotations

import contextlib
import logging
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from . import params as P
from .engine import NeuronConfig, Simulator, SpikeGenerator, build_noise, inject
from .errors import HookTooLate, LavanetError, PhaseError, ShapeMismatch, ValidationError
from .partition import compute_layout, split
from .plasticity import LearningRule, TraceState, parse_rule, update_traces
from .probes import PoolingReadout, ProbeStore, pool_and_step, post_process, write_spike_csv, \
    write_weight_snapshots
from .rng import stream
from .sparse import ReservoirWeights, init_anisotropic, init_constant, init_random, load as load_csr
from .stimulus import build_input

PHASES = ("onInit", "afterBuild", "afterRun")
BUILD_ORDER = ("weights", "partition", "stimulus", "noise", "output", "probes", "rule")


class RunLog:
    """Timestamped (phase, message) entries mirrored to ``run.log``."""

    def __init__(self, path, level="INFO"):
        self.path = Path(path)
        self.entries = []
        self.logger = logging.getLogger(f"lavanet.run.{self.path.parent.name}")
        self.logger.setLevel(level)

    def log(self, phase, message, level=logging.INFO):
        stamp = datetime.now().isoformat(timespec="milliseconds")
        self.entries.append((stamp, phase, message))
        with open(self.path, "a") as fh:
            fh.write(f"{stamp} [{phase}] {message}\n")
        self.logger.log(level, "[%s] %s", phase, message)

    def phases(self):
        return [ph for _, ph, _ in self.entries]


@dataclass
class Network:
    weights: ReservoirWeights = None
    layout: object = None
    grid: object = None
    plan: object = None
    noise: SpikeGenerator | None = None
    readout: PoolingReadout | None = None
    store: ProbeStore = None
    rule: LearningRule | None = None
    traces: TraceState | None = None
    sim: Simulator | None = None
    datasets: object = None
    w_max: float | None = None


def _run_dir(base, name):
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    root = Path(base) / f"{stamp}-{name}"
    path, k = root, 1
    while path.exists():
        k += 1
        path = root.with_name(f"{root.name}-{k}")
    path.mkdir(parents=True)
    return path


class Experiment:
    def __init__(self, name="experiment", parameters=None, hooks=None, base=None):
        self.name = name
        p = P.merge(base or P.defaults(), parameters or {})
        violations = P.validate(p)
        if violations:
            raise ValidationError(violations)
        self.p = p
        self.derived = P.derive(p)
        self.net = Network()
        self._hooks = {ph: [] for ph in PHASES}
        self._fired = set()
        self.built = False
        self.ran = False
        for phase, fns in (hooks or {}).items():
            for fn in (fns if isinstance(fns, (list, tuple)) else [fns]):
                self.register_hook(phase, fn)

        self.run_dir = _run_dir(p.outputDirectory, name)
        self.log = RunLog(self.run_dir / "run.log", p.logLevel)
        P.dump(p, self.derived, self.run_dir / "parameters.json")
        self.log.log("init", f"experiment {name!r} created in {self.run_dir}")
        self._fire("onInit")

    # --- hooks -------------------------------------------------------------

    def register_hook(self, phase, callback):
        if phase not in PHASES:
            raise ValueError(f"unknown hook phase {phase!r}; expected one of {PHASES}")
        if phase in self._fired:
            raise HookTooLate(f"{phase} has already run")
        self._hooks[phase].append(callback)

    def _fire(self, phase):
        self._fired.add(phase)
        for fn in self._hooks[phase]:
            fn(self)

    @contextlib.contextmanager
    def _phase(self, phase):
        self.log.log(phase, "start", logging.DEBUG)
        try:
            yield
        except LavanetError as exc:
            self.log.log(phase, f"failed: {type(exc).__name__}: {exc}", logging.ERROR)
            exc.phase = phase
            raise
        except Exception as exc:
            self.log.log(phase, f"failed: {type(exc).__name__}: {exc}", logging.ERROR)
            raise PhaseError(phase, exc) from exc

    # --- build -------------------------------------------------------------

    def _init_weights(self):
        p, d = self.p, self.derived
        n_ex, n_in = p.reservoirExSize, d.reservoirInSize
        rng = stream(p.seed, "weights")
        if p.weightFile is not None:
            full = load_csr(p.weightFile)
            if full.shape != (d.reservoirSize, d.reservoirSize):
                raise ShapeMismatch(f"{p.weightFile} holds a {full.shape} matrix, "
                                    f"network has {d.reservoirSize} neurons")
            return ReservoirWeights(n_ex, n_in, full)
        if p.weightInit == "constant":
            return init_constant(n_ex, n_in, p.reservoirConnPerNeuron, p.weightExMean, p.weightInMean, rng)
        if p.weightInit == "anisotropic2d":
            return init_anisotropic(d.gridWidth, d.gridHeight, p.reservoirConnPerNeuron,
                                    p.anisotropicShift, p.anisotropicSigma, rng, nEx=n_ex, nIn=n_in,
                                    distribution="lognormal", ex_mean=p.weightExMean,
                                    ex_sigma=p.weightExSigma, in_mean=p.weightInMean,
                                    in_sigma=p.weightInSigma)
        return init_random(n_ex, n_in, p.reservoirConnPerNeuron, p.weightInit, rng,
                           p.weightExMean, p.weightExSigma, p.weightInMean, p.weightInSigma)

    def build(self):
        if self.built:
            raise RuntimeError("experiment already built")
        p, d, net = self.p, self.derived, self.net
        t0 = time.perf_counter()

        with self._phase("weights"):
            net.weights = self._init_weights()
            self.log.log("weights", f"{net.weights.full.nnz} synapses over {d.reservoirSize} neurons")
        with self._phase("partition"):
            net.layout = compute_layout(d.reservoirSize, p.neuronsPerCore)
            net.grid = split(net.weights.full, net.layout)
            self.log.log("partition", f"{net.layout.coreCount} cores, {len(net.grid)} chunks")
        with self._phase("stimulus"):
            net.plan = build_input(p, stream(p.seed, "stimulus"))
            self.log.log("stimulus", f"{net.plan.mode} input")
        with self._phase("noise"):
            if p.noiseNeurons > 0:
                net.noise = build_noise(p, d.reservoirSize, d.totalSteps, stream(p.seed, "noise_targets"))
            self.log.log("noise", f"{p.noiseNeurons} noise targets")
        with self._phase("output"):
            if p.outputIsPooling:
                net.readout = PoolingReadout(p.reservoirExSize, p.outputSize, p.outputWeight,
                                             NeuronConfig.from_params(p))
            self.log.log("output", f"pooling readout: {p.outputIsPooling}")
        with self._phase("probes"):
            net.store = ProbeStore(net.layout, d.totalSteps, voltages=p.isVoltageProbe)
            self.log.log("probes", "per-core spike probes registered")
        with self._phase("rule"):
            if p.isLearningRule:
                ee = net.weights.ee.values
                net.w_max = p.weightMax if p.weightMax is not None else \
                    2.0 * (float(ee.mean()) if len(ee) else p.weightExMean)
                net.rule = LearningRule(parse_rule(p.learningRule), net.layout, p.reservoirExSize, net.w_max)
                net.traces = TraceState.zeros(d.reservoirSize)
                self.log.log("rule", f"learning rule parsed, wMax={net.w_max!r}")
            else:
                self.log.log("rule", "plasticity off")

        net.sim = Simulator(net.grid, NeuronConfig.from_params(p), threads=p.hostThreads)
        self.built = True
        self.log.log("build", f"build complete in {time.perf_counter() - t0:.3f} s")
        self._fire("afterBuild")
        return self

    # --- run ---------------------------------------------------------------

    def _generators(self, k):
        p, net = self.p, self.net
        T = p.stepsPerTrial
        key = 0 if p.generatorsFrozen else k
        gens, rngs = [], []
        for i, b in enumerate(net.plan.trials[k]):
            gens.append(SpikeGenerator(b.targets, [(k * T + b.window[0], k * T + b.window[1])],
                                       b.spikeProb, b.injectedWeight))
            rngs.append(stream(p.seed, "input", i, key))
        n_input = len(gens)
        if net.noise is not None:
            gens.append(net.noise)
            rngs.append(stream(p.seed, "noise", key))
        return gens, rngs, n_input

    def run(self):
        if not self.built:
            raise RuntimeError("build() must be called before run()")
        if self.ran:
            raise RuntimeError("run() may be called once per build")
        p, d, net = self.p, self.derived, self.net
        sim, store, traces = net.sim, net.store, net.traces
        T, n_ex = p.stepsPerTrial, p.reservoirExSize
        ranges = net.layout.neuronRanges
        t0 = time.perf_counter()

        with self._phase("run"):
            for k in range(p.trials):
                self.log.log("trial", f"trial {k} start")
                gens, rngs, n_input = self._generators(k)
                for s in range(T):
                    t = k * T + s
                    ext, fired = inject(gens, rngs, t, d.reservoirSize)
                    for hit in fired[:n_input]:
                        store.record_input(t, hit)
                    prev_ex = sim.spikes[:n_ex]
                    spikes = sim.step(ext)
                    for c, (s0, s1) in enumerate(ranges):
                        store.record_step(c, spikes[s0:s1], t, sim.cores[c].v if p.isVoltageProbe else None)
                    if net.readout is not None:
                        store.record_output(t, pool_and_step(net.readout, prev_ex))
                    if net.rule is not None:
                        update_traces(traces, spikes, spikes, p.traceTauPre, p.traceTauPost,
                                      p.traceImpulse, p.traceTauPost2)
                        # an epoch never straddles a trial boundary: updates
                        # land before the weight probe and the reset
                        if (s + 1) % p.learningEpoch == 0 or s == T - 1:
                            net.rule.apply(sim, traces)
                            traces.end_epoch()
                if p.isWeightProbe:
                    store.snapshot_weights(sim.grid())
                if p.resetBetweenTrials:
                    sim.reset(traces, p.resetTraces)
                    if net.readout is not None:
                        net.readout.reset()
                self.log.log("trial", f"trial {k} done")
            sim.close()

        with self._phase("postprocess"):
            net.datasets = post_process(store, net.layout, net.readout.size if net.readout else 0)
        with self._phase("export"):
            self.write_artifacts()
        self.ran = True
        self.log.log("run", f"run complete in {time.perf_counter() - t0:.3f} s, "
                            f"{int(net.datasets.raster.sum())} reservoir spikes")
        self._fire("afterRun")
        return net.datasets

    # --- outputs -----------------------------------------------------------

    @property
    def raster(self):
        return self.net.datasets.raster

    def final_weights(self):
        from .partition import merge

        return merge(self.net.sim.grid())

    def spike_counts(self):
        r = self.net.datasets.raster
        n_ex = self.p.reservoirExSize
        counts = {"ex": int(r[:n_ex].sum()), "in": int(r[n_ex:].sum())}
        if self.net.datasets.output_raster is not None:
            counts["out"] = int(self.net.datasets.output_raster.sum())
        return counts

    def write_artifacts(self):
        p, ds = self.p, self.net.datasets
        n_ex = p.reservoirExSize
        if p.isExSpikeProbe:
            write_spike_csv(ds.raster[:n_ex], self.run_dir / "spikes_ex.csv")
        if p.isInSpikeProbe:
            write_spike_csv(ds.raster[n_ex:], self.run_dir / "spikes_in.csv")
        if p.isOutSpikeProbe and ds.output_raster is not None:
            write_spike_csv(ds.output_raster, self.run_dir / "spikes_out.csv")
        if p.isWeightProbe:
            write_weight_snapshots(ds.weights, self.run_dir)
        if p.plotRaster:
            from .raster import raster_from_run

            (self.run_dir / "raster.svg").write_text(raster_from_run(self.run_dir))
