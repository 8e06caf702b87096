"""Evolutionary search over LLM-generated optimizer programs.

The loop keeps mu parent candidates. Each generation produces lambda
offspring: pick a parent uniformly at random, sample a mutation rate from
the heavy-tailed fast-mutation distribution, assemble the query (task
prompt, parent source, performance or error feedback, mutation
instruction), ask the LLM, extract the code, and score it over several
seeded sandbox runs. Plus strategies select the best mu from parents and
offspring, comma strategies from offspring only. Failed candidates (parse
failures, crashes, protocol violations) stay in the archive and receive
error feedback on their next mutation, which realizes the self-debugging
behavior.
"""

from __future__ import annotations

import csv
import re
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics, sandbox
from .problems import ProblemInstance

__all__ = [
    "CandidateAlgorithm",
    "EsConfig",
    "PromptBundle",
    "CodeExtractionError",
    "sample_mutation_rate",
    "mutation_rate_pmf",
    "build_task_prompt",
    "build_mutation_prompt",
    "build_feedback_prompt",
    "extract_code",
    "evaluate_candidate",
    "select_parents",
    "run_discovery",
    "load_prompt_bundle",
    "save_archive",
]

STATUS_EVALUATED = "evaluated"
STATUS_FAILED = "failed"

FAST_MUTATION_BETA = 1.5
FAST_MUTATION_MAX_PERCENT = 50

PROMPT_DIR = Path(__file__).parent / "prompts"

PLACEHOLDER_TOKENS = ("x", "n", "quota", "rest", "name", "aocc", "aocc_std",
                      "y_best", "y_best_std", "stderr",
                      "problem_description", "algorithmic_insight")


class CodeExtractionError(ValueError):
    """The LLM response carries no usable fenced code block."""


@dataclass
class CandidateAlgorithm:
    name: str
    description: str
    source: str
    line_count: int
    parent_name: str | None = None
    aocc_mean: float | None = None
    aocc_std: float | None = None
    y_best_mean: float | None = None
    y_best_std: float | None = None
    status: str = STATUS_FAILED
    error_text: str = ""
    birth_order: int = 0
    generation: int = 0


@dataclass(frozen=True)
class EsConfig:
    mu: int = 1
    lam: int = 1
    plus: bool = True
    total_candidates: int = 100
    runs_per_candidate: int = 3

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise ValueError("mu and lambda must be >= 1")
        if not self.plus and self.lam < self.mu:
            raise ValueError("comma strategy requires lambda >= mu")
        if self.total_candidates < self.mu + self.lam:
            raise ValueError("total_candidates must cover at least one generation")

    @property
    def label(self) -> str:
        return f"({self.mu}{'+' if self.plus else ','}{self.lam})"


@dataclass(frozen=True)
class PromptBundle:
    task: str
    mutation_template: str
    feedback_template: str
    error_feedback_template: str
    problem_description: str = ""
    algorithmic_insight: str = ""


def _substitute(template: str, mapping: dict) -> str:
    out = template
    for key, value in mapping.items():
        out = out.replace("{" + key + "}", str(value))
    return out


def load_prompt_bundle(problem: str | None = None, with_description: bool = True,
                       with_insight: bool = True, prompt_dir: Path = PROMPT_DIR) -> PromptBundle:
    """Shipped default prompts, optionally with the per-problem sections.

    ``problem`` is one of bragg / ellipsometry / photovoltaic (instance ids
    map onto these three families).
    """
    def read(name):
        return (prompt_dir / name).read_text(encoding="utf-8").strip()

    family = None
    if problem is not None:
        p = problem.lower()
        if "bragg" in p:
            family = "bragg"
        elif "ellipso" in p:
            family = "ellipsometry"
        elif "photovolta" in p:
            family = "photovoltaic"
        else:
            raise ValueError(f"no prompt sections for problem '{problem}'")
    description = read(f"problem_description_{family}.txt") if family and with_description else ""
    insight = read(f"algorithmic_insight_{family}.txt") if family and with_insight else ""
    return PromptBundle(
        task=read("task.txt"),
        mutation_template=read("mutation.txt"),
        feedback_template=read("feedback.txt"),
        error_feedback_template=read("error_feedback.txt"),
        problem_description=description,
        algorithmic_insight=insight,
    )


def build_task_prompt(bundle: PromptBundle) -> str:
    text = _substitute(bundle.task, {
        "problem_description": bundle.problem_description,
        "algorithmic_insight": bundle.algorithmic_insight,
    })
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# fast mutation operator

def mutation_rate_pmf(beta: float = FAST_MUTATION_BETA,
                      max_percent: int = FAST_MUTATION_MAX_PERCENT) -> np.ndarray:
    k = np.arange(1, max_percent + 1, dtype=float)
    w = k ** (-beta)
    return w / w.sum()


def sample_mutation_rate(line_count: int, rng,
                         beta: float = FAST_MUTATION_BETA,
                         max_percent: int = FAST_MUTATION_MAX_PERCENT) -> int:
    """Heavy-tailed mutation percentage in {1..max_percent}, P(k) ~ k^-beta."""
    if line_count < 1:
        raise ValueError("line_count must be >= 1")
    pmf = mutation_rate_pmf(beta, max_percent)
    return int(rng.choice(np.arange(1, max_percent + 1), p=pmf))


def line_quota(n_lines: int, x_percent: int) -> int:
    """Line-change quota exactly as printed in the mutation instruction."""
    return min(n_lines * x_percent // 100, 1)


def build_mutation_prompt(parent: CandidateAlgorithm, x_percent: int,
                          bundle: PromptBundle) -> str:
    if not 1 <= x_percent <= FAST_MUTATION_MAX_PERCENT:
        raise ValueError(f"mutation rate must lie in [1, {FAST_MUTATION_MAX_PERCENT}]")
    n = parent.line_count
    quota = line_quota(n, x_percent)
    return _substitute(bundle.mutation_template, {
        "x": x_percent, "n": n, "quota": quota, "rest": n - quota,
    })


def _g4(value) -> str:
    return format(float(value), ".4g")


def build_feedback_prompt(candidate: CandidateAlgorithm, bundle: PromptBundle) -> str:
    """Performance feedback, or the error variant for failed candidates."""
    if candidate.status == STATUS_FAILED or candidate.aocc_mean is None:
        return _substitute(bundle.error_feedback_template, {
            "name": candidate.name,
            "stderr": candidate.error_text.strip() or "(no output captured)",
        })
    return _substitute(bundle.feedback_template, {
        "name": candidate.name,
        "aocc": _g4(candidate.aocc_mean),
        "aocc_std": _g4(candidate.aocc_std),
        "y_best": _g4(candidate.y_best_mean),
        "y_best_std": _g4(candidate.y_best_std),
    })


# ---------------------------------------------------------------------------
# response parsing

_FENCE_RE = re.compile(r"```[ \t]*(?:[A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)
_NAME_RES = (re.compile(r"class\s+([A-Za-z_]\w*)"), re.compile(r"def\s+([A-Za-z_]\w*)"))


def extract_code(llm_response: str):
    """(name, description, source) from an LLM response.

    Source is the first fenced code block; the name is the first class (or
    function) identifier declared in it; the description is the first
    non-empty text line outside the block.
    """
    match = _FENCE_RE.search(llm_response)
    if match is None:
        raise CodeExtractionError("response contains no fenced code block")
    source = match.group(1)
    name = None
    for pattern in _NAME_RES:
        found = pattern.search(source)
        if found:
            name = found.group(1)
            break
    if name is None:
        raise CodeExtractionError("code block declares no class or function")
    outside = llm_response[:match.start()] + llm_response[match.end():]
    description = ""
    for line in outside.splitlines():
        stripped = line.strip().strip("`").strip()
        if stripped:
            description = stripped
            break
    return name, description, source


# ---------------------------------------------------------------------------
# evaluation and selection

def _count_lines(source: str) -> int:
    return max(1, len(source.strip("\n").splitlines()))


def evaluate_candidate(candidate: CandidateAlgorithm, instance: ProblemInstance,
                       runs_per_candidate: int = 3, timeout: float = sandbox.DEFAULT_TIMEOUT_S,
                       base_seed: int = 0, work_dir=None) -> CandidateAlgorithm:
    """Score a candidate over seeded sandbox runs; aggregate AOCC and y*.

    Any non-ok run marks the candidate failed; scores from completed runs
    are retained so partially working candidates still carry numbers.
    """
    own_tmp = None
    if work_dir is None:
        own_tmp = tempfile.TemporaryDirectory(prefix="photobench-cand-")
        work_dir = own_tmp.name
    try:
        source_path = Path(work_dir) / f"{candidate.name}.py"
        source_path.write_text(candidate.source, encoding="utf-8")
        command = [sys.executable, "-m", "photobench.runner", str(source_path)]
        cfg = metrics.AoccConfig(lb=instance.aocc_lb, ub=instance.aocc_ub)
        summaries = []
        errors = []
        failed = False
        for run_idx in range(runs_per_candidate):
            result = sandbox.run_candidate(command, instance, timeout=timeout,
                                           seed=base_seed + run_idx)
            if result.ok and len(result.trajectory) > 0:
                summaries.append(metrics.summarize_trajectory(
                    result.trajectory, cfg, instance.budget))
            else:
                failed = True
                detail = result.stderr_capture.strip() or f"status={result.status}"
                errors.append(f"run {run_idx}: {result.status}: {detail}")
        if summaries:
            a_mean, a_std, y_mean, y_std = metrics.summarize_runs(summaries)
            candidate.aocc_mean, candidate.aocc_std = a_mean, a_std
            candidate.y_best_mean, candidate.y_best_std = y_mean, y_std
        candidate.status = STATUS_FAILED if failed else STATUS_EVALUATED
        if failed:
            candidate.error_text = "\n".join(errors)[:sandbox.STDERR_CAP_BYTES]
        return candidate
    finally:
        if own_tmp is not None:
            own_tmp.cleanup()


def _selection_key(candidate: CandidateAlgorithm):
    evaluated = candidate.status == STATUS_EVALUATED
    aocc = candidate.aocc_mean if candidate.aocc_mean is not None else -1.0
    y_best = candidate.y_best_mean if candidate.y_best_mean is not None else np.inf
    return (0 if evaluated else 1, -aocc, y_best, candidate.birth_order)


def select_parents(parents, offspring, cfg: EsConfig):
    """Next parent set: best mu of parents+offspring (plus) or offspring (comma).

    Ordering: evaluated before failed, higher mean AOCC first, lower mean
    y* breaks ties, then earlier creation.
    """
    pool = list(parents) + list(offspring) if cfg.plus else list(offspring)
    ranked = sorted(pool, key=_selection_key)
    return ranked[:cfg.mu]


# ---------------------------------------------------------------------------
# the discovery loop

def _query(llm_client, prompt: str, retries: int = 3) -> str:
    last = None
    for _ in range(retries):
        try:
            return llm_client.complete(prompt)
        except Exception as exc:  # client failures become failed candidates
            last = exc
    raise RuntimeError(f"LLM client failed after {retries} attempts: {last}")


def _new_candidate(response: str, parent_name, birth_order: int,
                   generation: int, taken_names: set) -> CandidateAlgorithm:
    try:
        name, description, source = extract_code(response)
    except CodeExtractionError as exc:
        return CandidateAlgorithm(
            name=f"unparsed_{birth_order}", description="", source=response,
            line_count=_count_lines(response), parent_name=parent_name,
            status=STATUS_FAILED, error_text=str(exc),
            birth_order=birth_order, generation=generation)
    unique = name
    suffix = 1
    while unique in taken_names:
        suffix += 1
        unique = f"{name}_{suffix}"
    return CandidateAlgorithm(
        name=unique, description=description, source=source,
        line_count=_count_lines(source), parent_name=parent_name,
        birth_order=birth_order, generation=generation)


def run_discovery(instance: ProblemInstance, es: EsConfig, prompts: PromptBundle,
                  llm_client, seed: int = 0, timeout: float = sandbox.DEFAULT_TIMEOUT_S,
                  seed_candidate: str | None = None, out_dir=None, verbose: bool = False):
    """Generate and evolve ``es.total_candidates`` candidate algorithms.

    Returns the full archive (every candidate, failed ones included) in
    birth order. ``seed_candidate`` optionally replaces the LLM for the
    initial mu candidates with a fixed source text, reproducing runs that
    all start from the same solution.
    """
    rng = np.random.default_rng(seed)
    task_prompt = build_task_prompt(prompts)
    archive: list[CandidateAlgorithm] = []
    taken: set = set()

    def log(msg):
        if verbose:
            print(msg, flush=True)

    def spawn(prompt_text, parent_name, generation):
        order = len(archive)
        try:
            response = _query(llm_client, prompt_text)
        except RuntimeError as exc:
            cand = CandidateAlgorithm(
                name=f"llm_failure_{order}", description="", source="",
                line_count=1, parent_name=parent_name, status=STATUS_FAILED,
                error_text=str(exc), birth_order=order, generation=generation)
            archive.append(cand)
            taken.add(cand.name)
            return cand
        cand = _new_candidate(response, parent_name, order, generation, taken)
        taken.add(cand.name)
        if not cand.name.startswith("unparsed_"):
            evaluate_candidate(cand, instance, es.runs_per_candidate,
                               timeout=timeout, base_seed=seed)
        archive.append(cand)
        log(f"[{order + 1}/{es.total_candidates}] {cand.name}: {cand.status}"
            + (f" aocc={cand.aocc_mean:.4f}" if cand.aocc_mean is not None else ""))
        return cand

    # initial parents from the task prompt (or a fixed seed candidate)
    parents = []
    for _ in range(es.mu):
        if seed_candidate is not None:
            order = len(archive)
            cand = _new_candidate(seed_candidate, None, order, 0, taken)
            taken.add(cand.name)
            if not cand.name.startswith("unparsed_"):
                evaluate_candidate(cand, instance, es.runs_per_candidate,
                                   timeout=timeout, base_seed=seed)
            archive.append(cand)
        else:
            cand = spawn(task_prompt, None, 0)
        parents.append(cand)

    generation = 0
    while len(archive) < es.total_candidates:
        generation += 1
        n_offspring = min(es.lam, es.total_candidates - len(archive))
        offspring = []
        for _ in range(n_offspring):
            parent = parents[int(rng.integers(len(parents)))]
            x_rate = sample_mutation_rate(parent.line_count, rng)
            feedback = build_feedback_prompt(parent, prompts)
            mutation = build_mutation_prompt(parent, x_rate, prompts)
            prompt_text = (
                f"{task_prompt}\n\n"
                f"The selected solution to update is:\n"
                f"# Description: {parent.description}\n"
                f"```python\n{parent.source}\n```\n\n"
                f"{feedback}\n\n{mutation}"
            )
            offspring.append(spawn(prompt_text, parent.name, generation))
        parents = select_parents(parents, offspring, es)

    if out_dir is not None:
        save_archive(archive, out_dir)
    return archive


def save_archive(archive, out_dir) -> None:
    """Persist candidate sources plus a manifest CSV of scores and lineage."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["birth_order", "generation", "name", "status", "parent_name",
                         "aocc_mean", "aocc_std", "y_best_mean", "y_best_std",
                         "line_count", "description", "source_file"])
        for cand in archive:
            src_name = f"{cand.birth_order:04d}_{cand.name}.py"
            (out / src_name).write_text(cand.source, encoding="utf-8")
            writer.writerow([
                cand.birth_order, cand.generation, cand.name, cand.status,
                cand.parent_name or "",
                "" if cand.aocc_mean is None else format(cand.aocc_mean, ".17g"),
                "" if cand.aocc_std is None else format(cand.aocc_std, ".17g"),
                "" if cand.y_best_mean is None else format(cand.y_best_mean, ".17g"),
                "" if cand.y_best_std is None else format(cand.y_best_std, ".17g"),
                cand.line_count, cand.description, src_name])
