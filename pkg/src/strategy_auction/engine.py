"""One task's auction, end to end, and sequences thereof.

Per task: collect bids, jury-score them, pick the provisional winner by
lowest cost-minus-value, let strictly-cheaper agents refine against
retrieved auction memory, re-select, execute the final winner, append
the record to the bank.  Tasks in a sequence run strictly in order
because the bank evolves online.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .agents import AgentRuntime, StrategyDraft
from .domain import (
    LOST,
    WON,
    AgentProfile,
    AuctionRecord,
    Bid,
    DomainError,
    ExecutionResult,
    ScoringWeights,
    Task,
)
from .memory import MemoryBank
from .scoring import FeatureRow, net
from .seeding import rng_for
from .tuning.router import rank_key

DEFAULT_RETRIEVAL_K = 8


class AuctionError(DomainError):
    """A task's auction could not complete; carries the failing stage."""

    def __init__(self, task_id: str, stage: str, message: str):
        super().__init__(f"task {task_id}, stage {stage}: {message}")
        self.task_id = task_id
        self.stage = stage


class WeightPoolMismatchError(DomainError):
    """The weight file's judges do not match the pool's judging agents."""


@dataclass(frozen=True)
class AuctionConfig:
    weights: ScoringWeights
    retrieval_k: int = DEFAULT_RETRIEVAL_K
    refinement_enabled: bool = True
    tie_break: str = "price_then_id"
    jury_subset: frozenset[str] | None = None
    random_seed: int = 0
    strict: bool = True

    def __post_init__(self):
        if self.refinement_enabled and self.retrieval_k < 1:
            raise DomainError("retrieval_k must be >= 1 when refinement is enabled")


def select_final(
    provisional: tuple[str, float, float],
    refined: list[tuple[str, float, float]],
    tie_break: str = "price_then_id",
) -> str:
    """Two-case rule: best refining agent if it beats the provisional net.

    Entries are (agent_id, net, price); refined agents must all be
    strictly cheaper than the provisional winner.
    """
    prov_agent, prov_net, prov_price = provisional
    for agent, _, price in refined:
        if price >= prov_price:
            raise DomainError(f"refining agent {agent} is not cheaper than {prov_agent}")
    if not refined:
        return prov_agent
    best = min(refined, key=lambda e: (e[1], e[2], e[0]))
    if best[1] < prov_net:
        return best[0]
    return prov_agent


@dataclass
class RunIssue:
    task_id: str
    stage: str
    message: str

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "stage": self.stage, "message": self.message}


@dataclass
class RunResult:
    records: list[AuctionRecord]
    bank: MemoryBank | None
    errors: list[RunIssue] = field(default_factory=list)
    warnings: list[RunIssue] = field(default_factory=list)


class Auctioneer:
    """Binds a pool (profiles + runtimes), weights, and an embedder."""

    def __init__(
        self,
        profiles: list[AgentProfile],
        runtimes: dict[str, AgentRuntime],
        config: AuctionConfig,
        embedder=None,
    ):
        if not profiles:
            raise DomainError("agent pool is empty")
        ids = [p.id for p in profiles]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate agent ids in pool")
        missing = [p.id for p in profiles if p.id not in runtimes]
        if missing:
            raise DomainError(f"no runtime for agents {missing}")
        self.profiles = list(profiles)
        self.by_id = {p.id: p for p in profiles}
        self.runtimes = runtimes
        self.config = config
        self.embedder = embedder
        self.weights = self._effective_weights()
        self._last_warnings: list[RunIssue] = []

    def _judge_profiles(self) -> list[AgentProfile]:
        judges = [p for p in self.profiles if "judge" in p.roles]
        if self.config.jury_subset is not None:
            judges = [p for p in judges if p.id in self.config.jury_subset]
        if not judges:
            raise DomainError("no judging agents available")
        return judges

    def _effective_weights(self) -> ScoringWeights:
        """Weights restricted to the active jury; reject true mismatches.

        A jury-subset config or a coalition-restricted pool narrows the
        jury; the tuned vector may then carry extra judge entries, which
        are dropped.  A judge in the pool that the weights do not know is
        a mismatch and is rejected.
        """
        w = self.config.weights
        judge_ids = {p.id for p in self._judge_profiles()}
        unknown = judge_ids - set(w.w_judge)
        if unknown:
            raise WeightPoolMismatchError(
                f"pool judges {sorted(unknown)} missing from the weight file "
                f"(tuned for {sorted(w.w_judge)})"
            )
        if judge_ids == set(w.w_judge):
            return w
        return replace(w, w_judge={j: w.w_judge[j] for j in sorted(judge_ids)})

    # -- single auction ----------------------------------------------------

    def run_auction(
        self, task: Task, bank: MemoryBank | None, sequence_index: int = 0
    ) -> AuctionRecord:
        config = self.config
        bidders = [p for p in self.profiles if "bidder" in p.roles]
        if not bidders:
            raise AuctionError(task.id, "propose", "no bidding agents in pool")
        judges = self._judge_profiles()

        drafts: dict[str, StrategyDraft] = {}
        for profile in bidders:
            try:
                drafts[profile.id] = self.runtimes[profile.id].propose(task, task.context)
            except Exception as exc:
                if config.strict:
                    raise AuctionError(task.id, "propose", f"bidder {profile.id}: {exc}")
                continue
        if not drafts:
            raise AuctionError(task.id, "propose", "every bidder failed")

        initial_bids: list[Bid] = []
        rows: dict[str, FeatureRow] = {}
        nets: dict[str, float] = {}
        for profile in bidders:
            if profile.id not in drafts:
                continue
            bid = self._scored_bid(task, profile, drafts[profile.id], judges, refined=False)
            initial_bids.append(bid)
            row = FeatureRow.from_bid(bid, profile.price)
            rows[bid.key] = row
            nets[bid.key] = net(row, self.weights).net

        provisional = min(
            initial_bids,
            key=lambda b: rank_key(rows[b.key], nets[b.key], config.tie_break),
        )
        prov_profile = self.by_id[provisional.agent_id]

        refined_bids: list[Bid] = []
        refined_entries: list[tuple[str, float, float]] = []
        query_embedding = None
        if bank is not None:
            if self.embedder is None:
                raise DomainError("a memory bank requires an embedder")
            query_embedding = self.embedder.embed(task.prompt)
        if config.refinement_enabled and bank is not None and len(bank) > 0:
            for profile in bidders:
                if profile.id not in drafts:
                    continue
                if profile.price_per_mtok >= prov_profile.price_per_mtok:
                    continue
                retrieved = bank.retrieve_top_k(query_embedding, config.retrieval_k)
                pairs = bank.build_pairs(retrieved, profile.id)
                if not pairs:
                    continue
                try:
                    rdraft = self.runtimes[profile.id].refine(
                        task, drafts[profile.id].text, pairs
                    )
                    rbid = self._scored_bid(task, profile, rdraft, judges, refined=True)
                except Exception as exc:  # a refinement failure skips that agent only
                    self._last_warnings.append(
                        RunIssue(task.id, "refine", f"agent {profile.id}: {exc}")
                    )
                    continue
                refined_bids.append(rbid)
                rrow = FeatureRow.from_bid(rbid, profile.price)
                rows[rbid.key] = rrow
                nets[rbid.key] = net(rrow, self.weights).net
                refined_entries.append((profile.id, nets[rbid.key], profile.price))

        final_id = select_final(
            (provisional.agent_id, nets[provisional.key], prov_profile.price),
            refined_entries,
            config.tie_break,
        )
        if final_id == provisional.agent_id:
            winning_bid = provisional
        else:
            winning_bid = next(b for b in refined_bids if b.agent_id == final_id)

        try:
            execution = self.runtimes[final_id].execute(task, winning_bid.strategy_text)
        except Exception as exc:
            raise AuctionError(task.id, "execute", f"agent {final_id}: {exc}")
        execution = ExecutionResult(
            answer=execution.answer,
            correct=execution.correct,
            trace_tokens=execution.trace_tokens,
            spend=self.by_id[final_id].price * execution.trace_tokens / 1e6,
        )

        # Refinement never hurts: the selection rule only switches on a
        # strict improvement.
        assert nets[winning_bid.key] <= nets[provisional.key] + 1e-12

        all_bids = initial_bids + refined_bids
        record = AuctionRecord(
            task_id=task.id,
            initial_bids=tuple(initial_bids),
            refined_bids=tuple(refined_bids),
            provisional_winner=provisional.agent_id,
            final_winner=final_id,
            winning_strategy=winning_bid.strategy_text,
            outcome_label={b.key: WON if b.key == winning_bid.key else LOST for b in all_bids},
            bid_nets={b.key: nets[b.key] for b in all_bids},
            execution=execution,
            sequence_index=sequence_index,
        )
        if bank is not None:
            bank.append(record, query_embedding)
        return record

    def _scored_bid(
        self,
        task: Task,
        profile: AgentProfile,
        draft: StrategyDraft,
        judges: list[AgentProfile],
        refined: bool,
    ) -> Bid:
        lo, hi = self.weights.score_range
        votes: dict[str, int] = {}
        vote_overhead = 0
        for judge in judges:
            score, tokens = self.runtimes[judge.id].judge(task, draft.text)
            if not lo <= score <= hi:
                raise AuctionError(
                    task.id, "judge", f"judge {judge.id} returned {score} outside [{lo}, {hi}]"
                )
            votes[judge.id] = score
            vote_overhead += tokens
        return Bid(
            agent_id=profile.id,
            strategy_text=draft.text,
            token_count=draft.token_count,
            entropy=draft.entropy,
            jury_scores=votes,
            refined=refined,
            overhead_tokens=draft.overhead_tokens + vote_overhead,
            score_range=(lo, hi),
        )

    # -- sequences -----------------------------------------------------------

    def run_sequence(self, tasks: list[Task], bank: MemoryBank | None) -> RunResult:
        ids = [t.id for t in tasks]
        if len(set(ids)) != len(ids):
            raise DomainError("task ids must be unique within a sequence")
        result = RunResult(records=[], bank=bank)
        self._last_warnings = result.warnings
        for index, task in enumerate(tasks):
            try:
                record = self.run_auction(task, bank, sequence_index=index)
            except AuctionError as exc:
                result.errors.append(RunIssue(exc.task_id, exc.stage, str(exc)))
                continue
            result.records.append(record)
        return result


def permute_tasks(tasks: list[Task], seed: int, run_label: object = 0) -> list[Task]:
    """Deterministic permutation for order-sensitivity studies."""
    order = list(tasks)
    rng_for(seed, "permutation", run_label).shuffle(order)
    return order
