"""The fuzzing loop.

For each optimization the campaign obtains a requirement once, then runs
``iterations`` rounds of generate, execute, judge and credit.  A round uses
the initial generation prompt until the optimization has at least one
triggering test; after that it uses the feedback prompt with examples chosen
by the configured strategy.

Rounds are processed iteration-major: all optimizations advance one
iteration (concurrently, on a bounded worker pool), then their outcomes are
merged in catalog order and a checkpoint is written.  Each optimization's
state is touched only by the worker running it, so the merged trace does not
depend on scheduling.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .bandit import ArmPool
from .collector import Optimization, collect, read_catalog, write_catalog
from .config import RunConfig, Strategy, dump_config
from .errors import BackendUnavailable, CampaignLocked, ConfigError, CorruptCampaign, OptFuzzError, ReplayMiss
from .gateway import (
    Gateway,
    HttpBackend,
    ModelRole,
    RecordingBackend,
    RecordStore,
    ReplayBackend,
    StubBackend,
    extract_code_blocks,
)
from .gateway.core import Role
from .oracle import BugStore, ComparisonPolicy, Verdict, VerdictKind, judge
from .programs import TestProgram
from .prompts.engine import (
    Family,
    PromptConfig,
    Requirement,
    RequirementFormat,
    SeedShots,
    build_feedback_prompt,
    build_generation_prompt,
    build_summarization_prompt,
    convert_requirement,
    load_seed_shots,
)
from .sut.base import Mode, RunRequest, RunResult, Sut
from .triggers import TriggerStats, make_record, parse_trigger_log

log = logging.getLogger(__name__)

CHECKPOINT = "checkpoint.json"
LOCK = "campaign.lock"
FORMAT_VERSION = 1


def derive_seed(*parts) -> int:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# per-optimization state
# ---------------------------------------------------------------------------


@dataclass
class TestOutcome:
    program: TestProgram
    optimized: RunResult
    baseline: RunResult
    verdict: Verdict
    triggered: frozenset
    credited: bool

    __test__ = False

    def to_dict(self) -> dict:
        return {
            "test": self.program.to_dict(),
            "verdict": self.verdict.to_dict(),
            "triggered": sorted(self.triggered),
            "credited": self.credited,
            "optimized": self.optimized.to_dict(),
            "baseline": self.baseline.to_dict(),
        }


@dataclass
class IterationOutcome:
    opt: str
    iteration: int
    family: str = ""
    example_ids: tuple = ()
    prompt_hash: str = ""
    results: list[TestOutcome] = field(default_factory=list)
    backend_failures: int = 0
    error: str | None = None

    @property
    def num_trigger(self) -> int:
        return sum(r.credited for r in self.results)


@dataclass
class OptState:
    opt: Optimization
    pool: ArmPool
    requirement: Requirement | None = None
    examples: dict = field(default_factory=dict)  # test id -> TestProgram that triggered this optimization
    tests: int = 0
    hits: int = 0
    backend_failures: int = 0
    blocked: str | None = None
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "requirement": self.requirement.to_dict() if self.requirement else None,
            "examples": {k: v.to_dict() for k, v in sorted(self.examples.items())},
            "tests": self.tests,
            "hits": self.hits,
            "backend_failures": self.backend_failures,
            "blocked": self.blocked,
            "seconds": self.seconds,
            "pool": self.pool.state(),
        }

    @classmethod
    def from_dict(cls, opt: Optimization, d: dict) -> "OptState":
        return cls(
            opt,
            ArmPool.from_state(d["pool"]),
            Requirement.from_dict(d["requirement"]) if d["requirement"] else None,
            {k: TestProgram.from_dict(v) for k, v in d["examples"].items()},
            d["tests"],
            d["hits"],
            d["backend_failures"],
            d["blocked"],
            d.get("seconds", 0.0),
        )


# ---------------------------------------------------------------------------
# requirement summarization
# ---------------------------------------------------------------------------


class Summarizer:
    """Requirements are requested once per optimization and then served from cache."""

    def __init__(self, gateway: Gateway | None, role: ModelRole, descriptor, shots: SeedShots,
                 fmt: RequirementFormat, prompt_config: PromptConfig, cache_dir: Path | None = None,
                 seed: int = 0):
        self.gateway = gateway
        self.role = role
        self.descriptor = descriptor
        self.shots = shots
        self.format = RequirementFormat(fmt)
        self.prompt_config = prompt_config
        self.cache_dir = cache_dir
        self.seed = seed
        self.cache: dict[str, Requirement] = {}
        self.model_calls = 0

    def _path(self, opt: Optimization) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / f"{opt.name}.{self.format.value}.json"

    def __call__(self, opt: Optimization) -> Requirement:
        key = f"{opt.id}:{self.format.value}"
        if key in self.cache:
            return self.cache[key]
        path = self._path(opt)
        if path is not None and path.exists():
            req = Requirement.from_dict(json.loads(path.read_text(encoding="utf-8")))
        elif self.format is RequirementFormat.RAW_IMPL:
            req = Requirement(opt.name, RequirementFormat.RAW_IMPL, opt.full_source(), "human")
        else:
            if self.gateway is None:
                raise BackendUnavailable("no analysis backend configured")
            bundle = build_summarization_prompt(opt, self.shots.summarization, self.descriptor, self.prompt_config)
            result = self.gateway.complete(self.role, bundle, self.seed)
            self.model_calls += 0 if result.from_cache else 1
            text = next((t.strip() for t in result.texts if t.strip()), "")
            if not text:
                raise BackendUnavailable(f"analysis model returned no requirement for {opt.name}")
            mixed = Requirement(opt.name, RequirementFormat.MIXED, text + "\n", self.gateway.backend.name)
            req = convert_requirement(mixed, self.format, opt)
        if path is not None:
            _write_json(path, req.to_dict())
        self.cache[key] = req
        return req


def summarize_requirement(opt: Optimization, summarizer: Summarizer) -> Requirement:
    return summarizer(opt)


# ---------------------------------------------------------------------------
# one round
# ---------------------------------------------------------------------------


@dataclass
class LoopContext:
    """Everything a round needs besides the optimization's own state."""

    config: RunConfig
    sut: Sut
    descriptor: object
    gateway: Gateway
    role: ModelRole
    shots: SeedShots
    prompt_config: PromptConfig
    policy: ComparisonPolicy
    forbidden: tuple = ()


def _execute(ctx: LoopContext, program: TestProgram) -> tuple[RunResult, RunResult]:
    cfg = ctx.config.campaign
    kw = dict(time_limit=cfg.time_limit, memory_limit=cfg.memory_limit)
    opt_res = ctx.sut.compile_and_run(RunRequest(program, Mode.OPTIMIZED, **kw))
    base_res = ctx.sut.compile_and_run(RunRequest(program, Mode.BASELINE, **kw))
    return opt_res, base_res


def run_iteration(state: OptState, iteration: int, ctx: LoopContext) -> IterationOutcome:
    cfg = ctx.config.campaign
    opt = state.opt
    out = IterationOutcome(opt.name, iteration)
    start = time.perf_counter()
    try:
        if state.blocked:
            out.error = state.blocked
            return out
        if state.requirement is None:
            out.error = state.blocked = "no requirement"
            return out
        use_feedback = cfg.strategy is not Strategy.NO_FEEDBACK and len(state.pool) > 0
        if use_feedback:
            if cfg.strategy is Strategy.THOMPSON:
                chosen = state.pool.select(cfg.feedback_examples)
            else:
                chosen = state.pool.select_random(cfg.feedback_examples)
            bundle = build_feedback_prompt(state.requirement, [state.examples[i] for i in chosen], ctx.descriptor,
                                           ctx.prompt_config, opt.name)
        else:
            bundle = build_generation_prompt(state.requirement, ctx.shots.generation, ctx.descriptor,
                                             ctx.prompt_config, opt.name)
        parents = tuple(bundle.example_ids)
        out.family, out.example_ids, out.prompt_hash = bundle.family.value, parents, bundle.hash

        try:
            completion = ctx.gateway.complete(ctx.role, bundle, derive_seed(cfg.seed, opt.name, "gen", iteration))
            texts = completion.texts[: cfg.batch_size]
        except (BackendUnavailable, ReplayMiss) as exc:
            log.warning("%s iteration %d: %s", opt.name, iteration, exc)
            texts = []
            out.error = str(exc)
        out.backend_failures = cfg.batch_size - len(texts)

        for j, text in enumerate(texts):
            blocks = extract_code_blocks(text, prompt=bundle.text)
            code = blocks[0] if blocks else ""
            program = TestProgram(f"{opt.name}-{iteration:04d}-{j:02d}", opt.id, code, iteration, parents, bundle.hash)
            try:
                opt_res, base_res = _execute(ctx, program)
            except OptFuzzError as exc:
                state.blocked = f"SUT failure: {exc}"
                out.error = state.blocked
                out.backend_failures += len(texts) - j
                break
            verdict = judge(opt_res, base_res, ctx.policy, ctx.forbidden)
            triggered = frozenset(parse_trigger_log(opt_res.trigger_log))
            credited = opt.name in triggered and verdict.kind is not VerdictKind.INVALID
            out.results.append(TestOutcome(program, opt_res, base_res, verdict, triggered, credited))

        new_ids = [r.program.id for r in out.results if r.credited]
        for r in out.results:
            if r.credited:
                state.examples[r.program.id] = r.program
        state.tests += len(out.results)
        state.hits += len(new_ids)
        state.backend_failures += out.backend_failures
        if use_feedback:
            # every example in the prompt is credited with the whole batch; samples
            # lost to backend failures were never generated and count for nothing
            state.pool.update(parents, out.num_trigger, len(out.results) - out.num_trigger)
            state.pool.admit_new(parents, new_ids)
        else:
            for i in new_ids:
                state.pool.seed_arm(i)
        return out
    finally:
        state.seconds += time.perf_counter() - start


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def build_report(meta: dict, states: dict[str, dict], stats: TriggerStats, bugs: list[dict]) -> dict:
    rows = []
    for name in stats.catalog:
        st = states[name]
        rows.append({
            "name": name,
            "triggered": name in stats.distinct,
            "triggering_tests": st["hits"],
            "tests": st["tests"],
            "incidental": stats.incidental.get(name, 0),
            "backend_failures": st["backend_failures"],
            "blocked": st["blocked"],
            "bugs": sum(1 for b in bugs if b["first_test_id"].startswith(name + "-")),
        })
    return {
        **meta,
        "optimizations": rows,
        "totals": {
            "triggered_opt_count": stats.triggered_opt_count,
            "triggering_tests": sum(r["triggering_tests"] for r in rows),
            "tests": sum(r["tests"] for r in rows),
            "backend_failures": sum(r["backend_failures"] for r in rows),
            "bugs": len(bugs),
        },
        "bugs": [{k: b[k] for k in ("dedup_key", "kind", "first_test_id", "occurrences", "opt_context")} for b in bugs],
    }


def render_report(report: dict, timing: dict | None = None) -> str:
    header = ["optimization", "# triggered", "# triggering tests", "# tests"]
    if timing is not None:
        header.append("time (s)")
    rows = []
    for r in report["optimizations"]:
        row = [r["name"], "1" if r["triggered"] else "0", str(r["triggering_tests"]), str(r["tests"])]
        if timing is not None:
            row.append(f"{timing.get('per_optimization', {}).get(r['name'], 0.0):.2f}")
        rows.append(row)
    t = report["totals"]
    total = ["TOTAL", str(t["triggered_opt_count"]), str(t["triggering_tests"]), str(t["tests"])]
    if timing is not None:
        total.append(f"{timing.get('wall_time', 0.0):.2f}")
    widths = [max(len(x[i]) for x in [header, *rows, total]) for i in range(len(header))]

    def line(cells):
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    out = [
        f"campaign: sut={report['sut']} strategy={report['strategy']} format={report['requirement_format']} "
        f"iterations={report['iterations']} batch={report['batch_size']} seed={report['seed']}",
        line(header),
        "  ".join("-" * w for w in widths),
        *(line(r) for r in rows),
        "  ".join("-" * w for w in widths),
        line(total),
        "",
        f"bugs: {t['bugs']}",
    ]
    for b in report["bugs"]:
        out.append(f"  [{b['kind']}] {b['dedup_key']}  first={b['first_test_id']} x{b['occurrences']}")
    blocked = [r for r in report["optimizations"] if r["blocked"]]
    for r in blocked:
        out.append(f"blocked: {r['name']}: {r['blocked']}")
    return "\n".join(out) + "\n"


def load_report(campaign_dir) -> dict:
    """Report of a campaign directory, rebuilt from the checkpoint when the run did not finish."""
    d = Path(campaign_dir)
    path = d / "report.json"
    try:
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        ck = d / CHECKPOINT
        if not ck.exists():
            raise CorruptCampaign(f"{d} has neither report.json nor {CHECKPOINT}")
        data = json.loads(ck.read_text(encoding="utf-8"))
        stats = TriggerStats.from_state(data["catalog"], data["stats"])
        return build_report(data["meta"], data["opts"], stats, data["bugs"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorruptCampaign(f"{d}: {exc}") from None


# ---------------------------------------------------------------------------
# campaign driver
# ---------------------------------------------------------------------------


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class DirectoryLock:
    def __init__(self, directory: Path):
        self.path = directory / LOCK

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        for _ in range(2):
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                try:
                    pid = int(self.path.read_text().strip() or 0)
                except (OSError, ValueError):
                    pid = 0
                if pid and _pid_alive(pid):
                    raise CampaignLocked(f"{self.path.parent} is in use by process {pid}") from None
                self.path.unlink(missing_ok=True)  # stale lock
                continue
            with os.fdopen(fd, "w") as f:
                f.write(str(os.getpid()))
            return self
        raise CampaignLocked(f"cannot lock {self.path.parent}")

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)


def build_sut(config: RunConfig):
    s = config.sut
    if s.kind == "minilang":
        from .sut.minilang import MiniLangSut

        return MiniLangSut(planted_bugs=s.planted_bugs, isolation=s.isolation)
    from .sut.manifest import ManifestSut

    return ManifestSut.from_file(config.resolve(s.manifest))


def build_catalog(config: RunConfig, sut) -> list[Optimization]:
    desc = sut.descriptor()
    changes = {}
    if config.sut.keywords:
        changes["opt_keywords"] = tuple(config.sut.keywords)
    if config.sut.max_source_lines is not None:
        changes["max_source_lines"] = config.sut.max_source_lines
    if changes:
        desc = dataclasses.replace(desc, **changes)
    return collect(desc, aux_depth=config.sut.aux_depth)


def build_role(settings, role: Role, batch_size: int | None, prompt_config: PromptConfig) -> ModelRole:
    samples = settings.samples_per_call
    if role is Role.GENERATION:
        if samples is not None and samples != batch_size:
            raise ConfigError("generation.samples_per_call must equal campaign.batch_size")
        samples = batch_size
    return ModelRole(role, settings.backend, settings.temperature, samples, settings.max_output,
                     context=prompt_config)


class Campaign:
    """A campaign bound to one directory.

    ``backends`` may map ``"analysis"`` / ``"generation"`` to ready-made backend
    objects, which take precedence over the config (handy in tests).
    """

    def __init__(self, config: RunConfig, directory, sut=None, catalog: list[Optimization] | None = None,
                 backends: dict | None = None):
        self.config = config
        self.dir = Path(directory)
        self.sut = sut if sut is not None else build_sut(config)
        self.descriptor = self.sut.descriptor()
        self._catalog = catalog
        self._backends = backends or {}
        self.prompt_config = PromptConfig(config.prompt.context_tokens, config.prompt.chars_per_token)
        self.gateways: dict[str, Gateway] = {}
        self.summarizer: Summarizer | None = None
        self._stub: StubBackend | None = None

    # -- construction helpers ----------------------------------------------

    def _backend(self, which: str):
        if which in self._backends:
            return self._backends[which]
        s = getattr(self.config, which)
        if s.backend == "stub":
            if self._stub is None:
                self._stub = StubBackend(self.config.stub.build())
            inner = self._stub
        elif s.backend == "http":
            inner = HttpBackend(s.url, s.api_key_env, retries=s.retries, max_inflight=s.max_inflight)
        else:
            store_dir = self.config.resolve(s.replay_dir) if s.replay_dir else self.dir / "replay"
            return ReplayBackend(RecordStore(store_dir))
        if self.config.campaign.record:
            return RecordingBackend(inner, RecordStore(self.dir / "replay"))
        return inner

    def _gateway(self, which: str) -> Gateway:
        if which not in self.gateways:
            self.gateways[which] = Gateway(self._backend(which), self.dir / "cache" / f"{which}.jsonl")
        return self.gateways[which]

    @property
    def model_calls(self) -> int:
        """Calls that reached a live model (replayed answers do not count)."""
        return sum(g.calls for g in self.gateways.values() if not isinstance(g.backend, ReplayBackend))

    def catalog(self) -> list[Optimization]:
        if self._catalog is None:
            self._catalog = build_catalog(self.config, self.sut)
        return self._catalog

    def _shots(self) -> SeedShots:
        spec = self.config.prompt.shots
        if spec is None:
            return SeedShots()
        if spec == "default":
            if getattr(self.sut, "name", "") != "minilang":
                return SeedShots()
            from .sut.minilang.sut import MINILANG_ROOT

            path = MINILANG_ROOT / "fewshot.yaml"
        else:
            path = Path(self.config.resolve(spec))
        full = collect(self.descriptor, aux_depth=0)
        try:
            return load_seed_shots(path, full)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load few-shot seeds from {path}: {exc}") from None

    def _meta(self) -> dict:
        c = self.config.campaign
        return {
            "sut": self.descriptor.name,
            "strategy": c.strategy.value,
            "requirement_format": c.requirement_format.value,
            "iterations": c.iterations,
            "batch_size": c.batch_size,
            "feedback_examples": c.feedback_examples,
            "seed": c.seed,
        }

    # -- checkpointing -------------------------------------------------------

    def _checkpoint(self, next_iteration, states, stats, bugs, wall_time=0.0):
        data = {
            "wall_time": wall_time,
            "version": FORMAT_VERSION,
            "next_iteration": next_iteration,
            "meta": self._meta(),
            "catalog": [o.name for o in self.catalog()],
            "opts": {n: s.to_dict() for n, s in states.items()},
            "stats": stats.state(),
            "bugs": bugs.state(),
        }
        _write_json(self.dir / CHECKPOINT, data)
        for n, s in states.items():
            _write_json(self.dir / "pools" / f"{n}.json", s.pool.state())

    # -- main loop -----------------------------------------------------------

    def run(self, resume: bool = False) -> dict:
        with DirectoryLock(self.dir):
            return self._run(resume)

    def _run(self, resume: bool) -> dict:
        cfg = self.config.campaign
        wall_start = time.perf_counter()
        catalog = self.catalog()
        if not catalog:
            raise ConfigError("the optimization catalog is empty")
        names = [o.name for o in catalog]
        by_name = {o.name: o for o in catalog}
        stats = TriggerStats(names)
        bugs = BugStore(self.dir / "bugs", getattr(self.sut, "program_suffix", ".txt"), cfg.file_timeouts)

        start_iter = 0
        ck_path = self.dir / CHECKPOINT
        if resume:
            if not ck_path.exists():
                raise CorruptCampaign(f"nothing to resume in {self.dir}")
            data = json.loads(ck_path.read_text(encoding="utf-8"))
            if data["catalog"] != names:
                raise CorruptCampaign("catalog changed since the campaign started")
            states = {n: OptState.from_dict(by_name[n], data["opts"][n]) for n in names}
            stats = TriggerStats.from_state(names, data["stats"])
            bugs.load_state(data["bugs"])
            start_iter = data["next_iteration"]
            prior_seconds = data.get("wall_time", 0.0)
        else:
            if ck_path.exists():
                raise CampaignLocked(f"{self.dir} already holds a campaign; use resume")
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / "config.yaml").write_text(dump_config(self.config), encoding="utf-8")
            write_catalog(catalog, self.dir / "catalog" / "catalog.jsonl")
            states = {
                o.name: OptState(o, ArmPool(derive_seed(cfg.seed, o.name, "pool"), cfg.max_arms)) for o in catalog
            }
            prior_seconds = 0.0

        shots = self._shots()
        gen_role = build_role(self.config.generation, Role.GENERATION, cfg.batch_size, self.prompt_config)
        self.summarizer = self._make_summarizer(shots)
        policy = ComparisonPolicy(cfg.comparison, cfg.rtol, cfg.atol)
        ctx = LoopContext(self.config, self.sut, self.descriptor, self._gateway("generation"), gen_role, shots,
                          self.prompt_config, policy, tuple(getattr(self.sut, "forbidden_patterns", ())))

        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            pending = [s for s in states.values() if s.requirement is None and not s.blocked]
            for s, req in zip(pending, pool.map(self._summarize_safe, pending)):
                if isinstance(req, Requirement):
                    s.requirement = req
                else:
                    s.blocked = req

            for it in range(start_iter, cfg.iterations):
                outcomes = list(pool.map(lambda s: run_iteration(s, it, ctx), [states[n] for n in names]))
                for outcome in outcomes:
                    self._merge(outcome, states, stats, bugs, by_name)
                stats.close_iteration(it)
                self._checkpoint(it + 1, states, stats, bugs, prior_seconds + time.perf_counter() - wall_start)

        stats.write(self.dir / "metrics.jsonl")
        report = build_report(self._meta(), {n: s.to_dict() for n, s in states.items()}, stats, bugs.summary())
        _write_json(self.dir / "report.json", report)
        wall = prior_seconds + time.perf_counter() - wall_start
        timing = {"wall_time": wall, "per_optimization": {n: s.seconds for n, s in states.items()}}
        _write_json(self.dir / "timing.json", timing)
        (self.dir / "report.txt").write_text(render_report(report), encoding="utf-8")
        return report

    def _make_summarizer(self, shots: SeedShots) -> Summarizer:
        cfg = self.config.campaign
        role = build_role(self.config.analysis, Role.ANALYSIS, None, self.prompt_config)
        needs_model = cfg.requirement_format is not RequirementFormat.RAW_IMPL
        return Summarizer(
            self._gateway("analysis") if needs_model else None, role, self.descriptor, shots,
            cfg.requirement_format, self.prompt_config, self.dir / "requirements",
            derive_seed(cfg.seed, "analysis"),
        )

    def summarize(self) -> list[tuple[Optimization, Requirement]]:
        """Requirements for the whole catalog, without fuzzing."""
        self.summarizer = self._make_summarizer(self._shots())
        return [(opt, self.summarizer(opt)) for opt in self.catalog()]

    def _summarize_safe(self, state: OptState):
        try:
            return self.summarizer(state.opt)
        except (BackendUnavailable, ReplayMiss, OptFuzzError) as exc:
            log.warning("requirement for %s unavailable: %s", state.opt.name, exc)
            return f"requirement unavailable: {exc}"

    def _merge(self, outcome: IterationOutcome, states, stats, bugs, by_name):
        d = self.dir / "tests" / outcome.opt / f"{outcome.iteration:04d}"
        d.mkdir(parents=True, exist_ok=True)
        _write_json(d / "prompt.json", {
            "family": outcome.family,
            "example_ids": list(outcome.example_ids),
            "prompt_hash": outcome.prompt_hash,
            "backend_failures": outcome.backend_failures,
            "error": outcome.error,
        })
        with open(d / "tests.jsonl", "w", encoding="utf-8") as f:
            for r in outcome.results:
                f.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
        catalog = set(by_name)
        for r in outcome.results:
            # an invalid program earns nothing, even if the optimized build logged triggers
            lines = r.optimized.trigger_log if r.verdict.kind is not VerdictKind.INVALID else ()
            stats.submit(make_record(r.program.id, lines, outcome.iteration, outcome.opt, catalog))
            bugs.record(r.verdict, r.program.id, r.program.code, r.triggered, r.optimized, r.baseline)
            if self.config.campaign.share_incidental and r.verdict.kind is not VerdictKind.INVALID:
                for other in sorted(r.triggered & catalog - {outcome.opt}):
                    st = states[other]
                    if r.program.id not in st.pool:
                        st.examples[r.program.id] = r.program
                        st.pool.seed_arm(r.program.id)


def run_campaign(catalog: list[Optimization] | None, config: RunConfig, directory, sut=None,
                 backends: dict | None = None) -> dict:
    return Campaign(config, directory, sut=sut, catalog=catalog, backends=backends).run()


def resume_campaign(directory, backends: dict | None = None) -> dict:
    from .config import load_config

    directory = Path(directory)
    if not (directory / "config.yaml").exists():
        raise CorruptCampaign(f"{directory} has no config.yaml")
    config = load_config(directory / "config.yaml")
    catalog = read_catalog(directory / "catalog" / "catalog.jsonl")
    return Campaign(config, directory, catalog=catalog, backends=backends).run(resume=True)
