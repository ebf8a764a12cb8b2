"""Agent gateway: one interface, two implementations.

``SyntheticAgent`` simulates a pool deterministically for desk-scale runs
and tests; ``RemoteAgent`` speaks a JSON chat-completion wire format to a
real deployment.  Both satisfy ``AgentRuntime``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Protocol

from .domain import AgentProfile, DomainError, ExecutionResult, Task
from .memory import ContrastivePair
from .prompts import render_template
from .seeding import rng_for, unit


class GatewayError(DomainError):
    """A capability call failed after its retry budget."""


@dataclass(frozen=True)
class StrategyDraft:
    """A proposed or refined strategy with its scoring features."""

    text: str
    token_count: int
    entropy: float
    overhead_tokens: int


class AgentRuntime(Protocol):
    """The four capabilities every pool agent exposes."""

    profile: AgentProfile

    def propose(self, task: Task, context: str | None = None) -> StrategyDraft: ...

    def refine(
        self, task: Task, initial_strategy: str, pairs: list[ContrastivePair]
    ) -> StrategyDraft: ...

    def judge(self, task: Task, strategy_text: str) -> tuple[int, int]:
        """Integer score in the configured range, plus the tokens spent voting."""
        ...

    def execute(self, task: Task, winning_strategy: str) -> ExecutionResult: ...


def normalize_entropy(per_token_entropies: list[float], vocab_size: int) -> float:
    """Mean per-token entropy in nats scaled by ln(vocab), clamped to [0, 1]."""
    if not per_token_entropies:
        raise DomainError("cannot normalize an empty entropy list")
    if vocab_size < 2:
        raise DomainError("vocab_size must be >= 2")
    mean = sum(per_token_entropies) / len(per_token_entropies)
    return min(1.0, max(0.0, mean / math.log(vocab_size)))


# --------------------------------------------------------------------------
# Synthetic agents
# --------------------------------------------------------------------------

_PLAN_RE = re.compile(
    r"plan agent=(?P<agent>\S+) task=(?P<task>\S+) refined=(?P<refined>[01]) boost=(?P<boost>[0-9.]+)"
)


@dataclass(frozen=True)
class SyntheticAgentSpec:
    """Laws generating one synthetic agent's behavior, all keyed by its seed."""

    skill_curve: dict[str, float]
    strategy_length_law: tuple[float, float]
    entropy_law: tuple[float, float]
    judge_bias: int = 0
    seed: int = 0
    judge_noise: float = 0.08
    self_flattery: float = 0.03
    refine_gain: float = 0.12
    refine_token_factor: float = 0.92
    quality_offset: float = 0.0

    def __post_init__(self):
        for label, p in self.skill_curve.items():
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"skill for bin {label} outside [0, 1]: {p}")

    def to_dict(self) -> dict:
        return {
            "skill_curve": {k: self.skill_curve[k] for k in sorted(self.skill_curve)},
            "strategy_length_law": list(self.strategy_length_law),
            "entropy_law": list(self.entropy_law),
            "judge_bias": self.judge_bias,
            "seed": self.seed,
            "judge_noise": self.judge_noise,
            "self_flattery": self.self_flattery,
            "refine_gain": self.refine_gain,
            "refine_token_factor": self.refine_token_factor,
            "quality_offset": self.quality_offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SyntheticAgentSpec:
        return cls(
            skill_curve={k: float(v) for k, v in d["skill_curve"].items()},
            strategy_length_law=tuple(d["strategy_length_law"]),
            entropy_law=tuple(d["entropy_law"]),
            judge_bias=int(d.get("judge_bias", 0)),
            seed=int(d.get("seed", 0)),
            judge_noise=float(d.get("judge_noise", 0.08)),
            self_flattery=float(d.get("self_flattery", 0.03)),
            refine_gain=float(d.get("refine_gain", 0.12)),
            refine_token_factor=float(d.get("refine_token_factor", 0.92)),
            quality_offset=float(d.get("quality_offset", 0.0)),
        )


class SyntheticWorld:
    """Shared context for a synthetic pool.

    Judges must rate bids from text alone, so bid quality is recomputable
    from the (bidder, task, refined, boost) header every synthetic strategy
    carries.  Execution correctness depends only on (agent, task), never on
    the strategy, so all-agents evaluations and auction runs agree.
    """

    def __init__(
        self,
        specs: dict[str, SyntheticAgentSpec],
        bin_of_task,
        trace_token_law: dict[str, float],
        score_range: tuple[int, int] = (0, 5),
        pair_saturation: int = 4,
        prices: dict[str, float] | None = None,
    ):
        self.specs = specs
        self.bin_of_task = bin_of_task  # callable: Task -> bin label
        self.trace_token_law = trace_token_law
        self.score_range = score_range
        self.pair_saturation = pair_saturation
        self.prices = prices or {}

    def skill(self, agent_id: str, task: Task) -> float:
        spec = self.specs[agent_id]
        label = self.bin_of_task(task)
        if label in spec.skill_curve:
            return spec.skill_curve[label]
        return min(spec.skill_curve.values())

    def is_correct(self, agent_id: str, task: Task) -> bool:
        spec = self.specs[agent_id]
        return unit(spec.seed, task.id, "exec") < self.skill(agent_id, task)

    def base_quality(self, agent_id: str, task: Task) -> float:
        spec = self.specs[agent_id]
        p = self.skill(agent_id, task)
        corr = 1.0 if self.is_correct(agent_id, task) else 0.0
        noise = rng_for(spec.seed, task.id, "quality").gauss(0.0, 0.04)
        return min(1.0, max(0.0, 0.12 + 0.62 * p + 0.18 * corr + spec.quality_offset + noise))

    def quality(self, agent_id: str, task: Task, boost: float) -> float:
        return min(1.0, max(0.0, self.base_quality(agent_id, task) + boost))

    def trace_tokens(self, agent_id: str, task: Task) -> int:
        spec = self.specs[agent_id]
        mean = self.trace_token_law.get(self.bin_of_task(task))
        if mean is None:
            mean = sum(self.trace_token_law.values()) / len(self.trace_token_law)
        jitter = rng_for(spec.seed, task.id, "trace").uniform(0.9, 1.1)
        return max(1, int(round(mean * jitter)))


def parse_plan_header(strategy_text: str) -> tuple[str, bool, float]:
    m = _PLAN_RE.search(strategy_text)
    if not m:
        raise GatewayError(f"unparseable synthetic strategy text: {strategy_text[:80]!r}")
    return m.group("agent"), m.group("refined") == "1", float(m.group("boost"))


class SyntheticAgent:
    """Deterministic simulated agent; every draw is keyed by (seed, task, kind)."""

    def __init__(self, profile: AgentProfile, spec: SyntheticAgentSpec, world: SyntheticWorld):
        self.profile = profile
        self.spec = spec
        self.world = world

    def _draft(self, task: Task, refined: bool, boost: float) -> StrategyDraft:
        spec = self.spec
        rng = rng_for(spec.seed, task.id, "propose")
        mean, spread = spec.strategy_length_law
        tokens = int(round(rng.gauss(mean, spread)))
        tokens = max(40, min(180, tokens))
        quality = self.world.quality(self.profile.id, task, boost)
        e_mean, e_spread = spec.entropy_law
        entropy = rng.gauss(e_mean + 0.25 * (quality - 0.5), e_spread)
        entropy = min(1.0, max(0.0, entropy))
        if refined:
            tokens = max(40, int(round(tokens * spec.refine_token_factor)))
            entropy = min(1.0, entropy + 0.05 * boost / max(spec.refine_gain, 1e-9))
        header = (
            f"plan agent={self.profile.id} task={task.id} "
            f"refined={int(refined)} boost={boost:.4f}"
        )
        body = " :: 1. restate the goal 2. gather evidence 3. verify 4. answer"
        return StrategyDraft(
            text=header + body,
            token_count=tokens,
            entropy=entropy,
            overhead_tokens=tokens,
        )

    def propose(self, task: Task, context: str | None = None) -> StrategyDraft:
        return self._draft(task, refined=False, boost=0.0)

    def refine(
        self, task: Task, initial_strategy: str, pairs: list[ContrastivePair]
    ) -> StrategyDraft:
        """Improvement law: gains grow with retrieved pairs and with the share
        of winning examples authored by peers the agent can actually imitate
        (its own price tier or near it), so refinement strengthens as the
        memory fills with accessible wins."""
        sat = self.world.pair_saturation
        coverage = min(len(pairs), sat) / sat
        accessible = 0
        own_price = self.world.prices.get(self.profile.id, self.profile.price)
        for pair in pairs:
            try:
                winner, _, _ = parse_plan_header(pair.winning_strategy)
            except GatewayError:
                continue
            if self.world.prices.get(winner, own_price) <= own_price * 2.0:
                accessible += 1
        accessible_frac = accessible / len(pairs) if pairs else 0.0
        boost = self.spec.refine_gain * coverage * (0.4 + 0.6 * accessible_frac)
        return self._draft(task, refined=True, boost=boost)

    def judge(self, task: Task, strategy_text: str) -> tuple[int, int]:
        bidder, refined, boost = parse_plan_header(strategy_text)
        quality = self.world.quality(bidder, task, boost)
        rng = rng_for(self.spec.seed, task.id, "judge", bidder, int(refined))
        perceived = quality + rng.gauss(0.0, self.spec.judge_noise)
        if bidder == self.profile.id:
            perceived += self.spec.self_flattery
        lo, hi = self.world.score_range
        score = int(round(lo + perceived * (hi - lo))) + self.spec.judge_bias
        score = max(lo, min(hi, score))
        vote_tokens = rng.randint(2, 4)
        return score, vote_tokens

    def execute(self, task: Task, winning_strategy: str) -> ExecutionResult:
        correct = self.world.is_correct(self.profile.id, task)
        tokens = self.world.trace_tokens(self.profile.id, task)
        spend = self.profile.price * tokens / 1e6
        return ExecutionResult(
            answer=f"synthetic answer by {self.profile.id} for {task.id}",
            correct=correct,
            trace_tokens=tokens,
            spend=spend,
        )


# --------------------------------------------------------------------------
# Remote agents
# --------------------------------------------------------------------------

_SCORE_RE = re.compile(r"Score:\s*\[?\s*(-?\d+)")
_END_PLAN = "<end_plan>"


@dataclass(frozen=True)
class RemoteEndpoint:
    url: str
    model: str
    api_key_env: str = "STRATEGY_AUCTION_API_KEY"
    timeout: float = 60.0
    vocab_size: int = 151_000
    fallback_entropy: float = 0.5
    request_logprobs: bool = True


@dataclass
class RemoteCallLog:
    """Soft diagnostics surfaced into the run transcript."""

    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)


def estimate_tokens(text: str) -> int:
    """Whitespace-token estimate used when usage metadata is missing."""
    return max(1, len(re.findall(r"\S+", text)))


class RemoteAgent:
    """Chat-completion client for one pool agent.

    Requests carry ``model``, ``messages`` and an optional ``logprobs``
    flag; replies are parsed for the message content, token usage, and
    per-token log probabilities when present.  Transport failures and
    malformed replies are retried once.
    """

    def __init__(
        self,
        profile: AgentProfile,
        endpoint: RemoteEndpoint,
        domain_tag: str = "deep_search",
        transport=None,
        log: RemoteCallLog | None = None,
    ):
        import httpx

        self.profile = profile
        self.endpoint = endpoint
        self.domain_tag = domain_tag
        self.log = log if log is not None else RemoteCallLog()
        headers = {}
        import os

        key = os.environ.get(endpoint.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(
            timeout=endpoint.timeout, headers=headers, transport=transport
        )

    def close(self) -> None:
        self._client.close()

    def _chat(self, prompt: str) -> dict:
        payload = {
            "model": self.endpoint.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.endpoint.request_logprobs:
            payload["logprobs"] = True
        last_error: Exception | None = None
        for _ in range(2):
            try:
                response = self._client.post(self.endpoint.url, json=payload)
                response.raise_for_status()
                return response.json()
            except Exception as exc:  # transport or HTTP failure; retried once
                last_error = exc
        raise GatewayError(f"chat completion failed for {self.profile.id}: {last_error}")

    def _draft_from_reply(self, reply: dict, kind: str) -> StrategyDraft:
        try:
            message = reply["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed {kind} reply for {self.profile.id}: {exc}")
        text = message.split(_END_PLAN)[0].strip() if _END_PLAN in message else message.strip()

        usage = reply.get("usage") or {}
        if "completion_tokens" in usage:
            tokens = int(usage["completion_tokens"])
        else:
            tokens = estimate_tokens(text)
            self.log.warn(
                f"{self.profile.id}/{kind}: usage metadata absent, using local token estimate"
            )

        entropies = _per_token_entropies(reply)
        if entropies:
            entropy = normalize_entropy(entropies, self.endpoint.vocab_size)
        else:
            entropy = self.endpoint.fallback_entropy
            self.log.warn(
                f"{self.profile.id}/{kind}: log-probabilities absent, using fallback entropy"
            )
        return StrategyDraft(
            text=text, token_count=max(1, tokens), entropy=entropy, overhead_tokens=max(1, tokens)
        )

    def propose(self, task: Task, context: str | None = None) -> StrategyDraft:
        prompt = render_template(
            "strategy",
            self.domain_tag,
            task=task.prompt,
            tool_descriptions="(deployment tools)",
            answer_facts=context or task.context or "",
        )
        return self._draft_from_reply(self._chat(prompt), "propose")

    def refine(
        self, task: Task, initial_strategy: str, pairs: list[ContrastivePair]
    ) -> StrategyDraft:
        examples = "\n\n".join(
            f"Example task: {p.source_task_id}\nLosing plan:\n{p.losing_strategy}\n"
            f"Winning plan:\n{p.winning_strategy}"
            for p in pairs
        )
        prompt = render_template(
            "refine",
            self.domain_tag,
            task=task.prompt,
            tool_descriptions="(deployment tools)",
            answer_facts=task.context or "",
            retrieved_tasks_and_plans=examples,
            previous_losing_plan=initial_strategy,
        )
        return self._draft_from_reply(self._chat(prompt), "refine")

    def judge(self, task: Task, strategy_text: str) -> tuple[int, int]:
        prompt = render_template("judge", None, task=task.prompt, plan=strategy_text)
        last_error = None
        for _ in range(2):
            reply = self._chat(prompt)
            try:
                content = reply["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                last_error = f"malformed judge reply: {exc}"
                continue
            m = _SCORE_RE.search(content)
            if m:
                usage = reply.get("usage") or {}
                vote_tokens = int(usage.get("completion_tokens", estimate_tokens(content)))
                return int(m.group(1)), max(1, vote_tokens)
            last_error = f"no integer score in reply: {content[:80]!r}"
        raise GatewayError(f"judge call failed for {self.profile.id}: {last_error}")

    def execute(self, task: Task, winning_strategy: str) -> ExecutionResult:
        prompt = (
            f"Task:\n{task.prompt}\n\nFollow this plan and return the final answer:\n"
            f"{winning_strategy}"
        )
        reply = self._chat(prompt)
        try:
            answer = reply["choices"][0]["message"]["content"].strip()
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed execution reply for {self.profile.id}: {exc}")
        usage = reply.get("usage") or {}
        total = usage.get("total_tokens")
        if total is None:
            total = estimate_tokens(answer)
            self.log.warn(f"{self.profile.id}/execute: usage absent, using local token estimate")
        correct = None
        if task.reference_answer is not None:
            correct = answer.strip().lower() == task.reference_answer.strip().lower()
        tokens = max(1, int(total))
        return ExecutionResult(
            answer=answer,
            correct=correct,
            trace_tokens=tokens,
            spend=self.profile.price * tokens / 1e6,
        )


def _per_token_entropies(reply: dict) -> list[float]:
    """Surprisal of each generated token, read from the logprobs block."""
    logprobs = reply.get("choices", [{}])[0].get("logprobs")
    if not logprobs:
        return []
    content = logprobs.get("content") or []
    values = []
    for item in content:
        lp = item.get("logprob")
        if lp is not None:
            values.append(max(0.0, -float(lp)))
    return values
