"""Deterministic in-process emulation of the on-chain contract layer.

A single ``Ledger`` instance plays the chain: a totally ordered sequence of
transactions mutates one state machine and appends to one event log.  The
contract surface:

* authorities stake currency to register and get slashed on a bad submission
* a data owner registers a sharing instance (gid) with its policy and an
  expected payout
* a data user deposits, posts a key request carrying its public key, and may
  withdraw while settlement is not yet achievable
* authorities submit encrypted keys with proofs; the ledger verifies with the
  pairing-check verifier and records the attribute only on acceptance
* settlement runs the policy judge over the verified attributes and splits
  the deposit between the owner and the accepting authorities

Money is integer base units.  Every operation either raises (and changes
nothing) or commits and appends events, so replaying a journal reproduces
state and events bit for bit.  The conservation invariant — balances + pools
+ stakes + treasury == minted total — holds after every transaction.

Payout split: the owner receives its expected value, each accepting
authority floor((deposit - expected) / n), and the integer remainder goes to
the owner so that the split is exact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Optional

from abeshare.accountability import (
    EncryptedKey,
    KeyProof,
    check_key_pc,
    submission_from_json,
    submission_to_json,
)
from abeshare.algebra import G1Elem
from abeshare.cpabe import AuthorityPublicKey, GlobalParams, authority_pub_from_json, authority_pub_to_json
from abeshare.policy import judge_attrs

__all__ = [
    "LedgerError",
    "InsufficientStakeError",
    "InsufficientBalanceError",
    "DuplicateGidError",
    "NoDepositError",
    "NoRequestError",
    "WithdrawBlockedError",
    "NotRegisteredError",
    "InsufficientPoolError",
    "RewardMismatchError",
    "TxContext",
    "VerifiedKeyRecord",
    "Ledger",
]


class LedgerError(ValueError):
    pass


class InsufficientStakeError(LedgerError):
    pass


class InsufficientBalanceError(LedgerError):
    pass


class DuplicateGidError(LedgerError):
    pass


class NoDepositError(LedgerError):
    pass


class NoRequestError(LedgerError):
    pass


class WithdrawBlockedError(LedgerError):
    pass


class NotRegisteredError(LedgerError):
    pass


class InsufficientPoolError(LedgerError):
    pass


class RewardMismatchError(LedgerError):
    """Caller-supplied reward addresses disagree with the accepted records."""


@dataclass(frozen=True)
class TxContext:
    sender: str
    value: int = 0

    def __post_init__(self):
        if self.value < 0:
            raise LedgerError("negative transaction value")


@dataclass(frozen=True)
class VerifiedKeyRecord:
    issuer: str
    attr: str
    ek: EncryptedKey
    proof: KeyProof
    verdict: str  # "accepted" | "slashed"


@dataclass
class _Request:
    pk_u: G1Elem
    attrs: tuple[str, ...]


class Ledger:
    """Single-writer contract state machine.  Not thread-safe by itself;
    concurrent producers must funnel transactions through one queue."""

    def __init__(self, gp: GlobalParams, min_stake: int = 100):
        self.gp = gp
        self.min_stake = min_stake
        self.seq = 0
        self.total_supply = 0
        self.treasury = 0
        self.balances: dict[str, int] = {}
        self.pool: dict[tuple[str, bytes], int] = {}
        self.expects: dict[bytes, int] = {}
        self.owner_of: dict[bytes, str] = {}
        self.policy_of: dict[bytes, str] = {}
        self.stakes: dict[str, int] = {}
        self.authority_pub: dict[str, AuthorityPublicKey] = {}
        self.requests: dict[tuple[bytes, str], _Request] = {}
        self.registry: dict[tuple[bytes, str], list[VerifiedKeyRecord]] = {}
        self.verified_attrs: dict[tuple[bytes, str], set[str]] = {}
        self.settled: set[tuple[bytes, str]] = set()
        self.events: list[dict] = []

    # -- helpers ------------------------------------------------------------

    def _emit(self, op: str, **payload) -> dict:
        self.seq += 1
        event = {"seq": self.seq, "op": op, **payload}
        self.events.append(event)
        return event

    def _debit(self, addr: str, amount: int) -> None:
        if self.balances.get(addr, 0) < amount:
            raise InsufficientBalanceError(f"{addr} holds {self.balances.get(addr, 0)} < {amount}")
        self.balances[addr] -= amount

    def _credit(self, addr: str, amount: int) -> None:
        self.balances[addr] = self.balances.get(addr, 0) + amount

    def total_funds(self) -> int:
        return (sum(self.balances.values()) + sum(self.pool.values())
                + sum(self.stakes.values()) + self.treasury)

    def check_conservation(self) -> None:
        if self.total_funds() != self.total_supply:
            raise AssertionError(
                f"conservation violated: {self.total_funds()} != supply {self.total_supply}")

    def _settlement_achievable(self, gid: bytes, user: str) -> bool:
        acp = self.policy_of.get(gid)
        if acp is None:
            return False
        if self.pool.get((user, gid), 0) <= self.expects.get(gid, 0):
            return False
        attrs = self.verified_attrs.get((gid, user), set())
        return judge_attrs(set(attrs), acp)

    # -- operations ---------------------------------------------------------

    def fund(self, addr: str, amount: int) -> None:
        """Genesis mint; the only operation that changes the total supply."""
        if amount <= 0:
            raise LedgerError("fund amount must be positive")
        self._credit(addr, amount)
        self.total_supply += amount
        self._emit("funded", addr=addr, amount=amount)

    def register_authority(self, tx: TxContext, auth_pub: AuthorityPublicKey) -> None:
        """Stake currency to offer key issuance; restaking adds to the stake."""
        if auth_pub.theta != tx.sender:
            raise LedgerError("authority key must be registered from its own address")
        if tx.value < self.min_stake:
            raise InsufficientStakeError(f"stake {tx.value} below minimum {self.min_stake}")
        if not auth_pub.is_consistent(self.gp):
            raise LedgerError("inconsistent authority public key")
        existing = self.authority_pub.get(tx.sender)
        if existing is not None and existing != auth_pub:
            raise LedgerError("authority already registered with a different key")
        self._debit(tx.sender, tx.value)
        self.stakes[tx.sender] = self.stakes.get(tx.sender, 0) + tx.value
        self.authority_pub[tx.sender] = auth_pub
        self._emit("authority-registered", authority=tx.sender, staked=tx.value,
                   stake=self.stakes[tx.sender], pub=authority_pub_to_json(auth_pub))

    def expect(self, tx: TxContext, gid: bytes, owner_val: int, acp: str) -> bool:
        """Owner announces a sharing instance: its policy and expected payout."""
        if gid in self.expects:
            raise DuplicateGidError(f"gid {gid.hex()} already registered")
        if owner_val < 0:
            raise LedgerError("owner value must be nonnegative")
        if tx.value != 0:
            raise LedgerError("expect carries no value")
        judge_attrs(set(), acp)  # reject malformed policies at registration
        self.expects[gid] = owner_val
        self.owner_of[gid] = tx.sender
        self.policy_of[gid] = acp
        self._emit("expected", gid=gid.hex(), owner=tx.sender, owner_val=owner_val, acp=acp)
        return True

    def deposit(self, tx: TxContext, gid: bytes) -> bool:
        """User escrows currency for one sharing instance.  A repeat deposit
        refunds the previous amount before recording the new one (assignment
        semantics with conservation)."""
        if tx.value <= 0:
            raise LedgerError("deposit must be positive")
        if (gid, tx.sender) in self.settled:
            raise LedgerError("instance already settled for this user")
        self._debit(tx.sender, tx.value)
        previous = self.pool.pop((tx.sender, gid), 0)
        if previous:
            self._credit(tx.sender, previous)
        self.pool[(tx.sender, gid)] = tx.value
        self._emit("deposited", gid=gid.hex(), user=tx.sender, amount=tx.value,
                   refunded=previous)
        return True

    def post_request(self, tx: TxContext, gid: bytes, pk_u: G1Elem, attrs: Iterable[str]) -> bool:
        """User publishes its public key and the attributes it wants keys
        for; authorities named in the policy are notified via the event."""
        if tx.value != 0:
            raise LedgerError("request carries no value")
        if self.pool.get((tx.sender, gid), 0) <= 0:
            raise NoDepositError("request requires a live deposit")
        self.requests[(gid, tx.sender)] = _Request(pk_u=pk_u, attrs=tuple(attrs))
        self._emit("request-posted", gid=gid.hex(), user=tx.sender,
                   pk_u=pk_u.encode().hex(), attrs=list(attrs))
        return True

    def withdraw(self, tx: TxContext, gid: bytes) -> bool:
        """Return the full escrow to the user.  Blocked once the instance is
        settled or settlement has become achievable (policy satisfied and the
        deposit exceeds the owner's expectation) — that closes the race
        between withdrawal and the automatic payout."""
        amount = self.pool.get((tx.sender, gid), 0)
        if amount <= 0:
            raise NoDepositError("nothing deposited for this gid")
        if (gid, tx.sender) in self.settled:
            raise WithdrawBlockedError("instance already settled")
        if self._settlement_achievable(gid, tx.sender):
            raise WithdrawBlockedError("settlement conditions already met")
        self.pool.pop((tx.sender, gid))
        self._credit(tx.sender, amount)
        self._emit("withdrawn", gid=gid.hex(), user=tx.sender, amount=amount)
        return True

    def submit_key(self, tx: TxContext, gid: bytes, user: str,
                   ek: EncryptedKey, proof: KeyProof) -> str:
        """Authority submits an encrypted key + proof for (gid, user).

        The proof is verified with the pairing-check verifier against the
        public key the user posted on the request board.  Acceptance records
        the attribute; any failure forfeits the authority's whole stake to
        the treasury and records a slashed verdict.
        """
        if tx.value != 0:
            raise LedgerError("submission carries no value")
        if self.stakes.get(tx.sender, 0) <= 0 or tx.sender not in self.authority_pub:
            raise NotRegisteredError(f"{tx.sender} has no active stake")
        if self.pool.get((user, gid), 0) <= 0:
            raise NoDepositError("target user has no live deposit for this gid")
        request = self.requests.get((gid, user))
        if request is None:
            raise NoRequestError("no key request posted for this (gid, user)")

        envelope_ok = (
            ek.issuer == tx.sender
            and ek.gid == gid
            and ek.target == request.pk_u
        )
        valid = envelope_ok and check_key_pc(
            ek, proof, gid, ek.attr, request.pk_u, self.authority_pub[tx.sender], self.gp)

        verdict = "accepted" if valid else "slashed"
        record = VerifiedKeyRecord(issuer=tx.sender, attr=ek.attr, ek=ek, proof=proof,
                                   verdict=verdict)
        self.registry.setdefault((gid, user), []).append(record)
        if valid:
            self.verified_attrs.setdefault((gid, user), set()).add(ek.attr)
            self._emit("key-accepted", gid=gid.hex(), user=user, issuer=tx.sender,
                       attr=ek.attr, envelope=submission_to_json(ek, proof))
        else:
            forfeited = self.stakes.pop(tx.sender, 0)
            self.treasury += forfeited
            self._emit("key-slashed", gid=gid.hex(), user=user, issuer=tx.sender,
                       attr=ek.attr, forfeited=forfeited,
                       envelope=submission_to_json(ek, proof))
        return verdict

    def reward(self, addr_u: str, addr_o: str, addrs: list[str], gid: bytes) -> bool:
        """Split the user's escrow: owner takes its expected value plus the
        division remainder, each listed authority takes an equal share.
        ``addrs`` must be exactly the accepting issuers for (gid, addr_u)."""
        accepted = self.accepted_issuers(gid, addr_u)
        if sorted(addrs) != accepted:
            raise RewardMismatchError("reward addresses must match accepted records")
        if not addrs:
            raise RewardMismatchError("no accepting authorities to reward")
        amount = self.pool.get((addr_u, gid), 0)
        owner_val = self.expects.get(gid, 0)
        if amount <= owner_val:
            raise InsufficientPoolError(f"pool {amount} must exceed owner value {owner_val}")
        if self.owner_of.get(gid) != addr_o:
            raise RewardMismatchError("owner address mismatch")
        avg, remainder = divmod(amount - owner_val, len(addrs))
        self.pool.pop((addr_u, gid))
        self._credit(addr_o, owner_val + remainder)
        for addr in sorted(addrs):
            self._credit(addr, avg)
        self._emit("rewarded", gid=gid.hex(), user=addr_u, owner=addr_o,
                   owner_amount=owner_val + remainder, authority_amount=avg,
                   authorities=sorted(addrs))
        return True

    def try_settle(self, gid: bytes, user: str, acp: Optional[str] = None) -> bool:
        """Run the policy judge over the user's verified attributes; on
        satisfaction pay out and emit the access grant toward the DSP.
        Returns False (no state change) when unsatisfied or already settled.
        """
        if (gid, user) in self.settled:
            return False
        if self.pool.get((user, gid), 0) <= 0:
            raise NoDepositError("no deposit to settle")
        registered = self.policy_of.get(gid)
        if registered is None:
            return False
        if acp is not None and acp != registered:
            raise LedgerError("supplied policy differs from the registered one")
        attrs = set(self.verified_attrs.get((gid, user), set()))
        if not judge_attrs(attrs, registered):
            return False
        addrs = self.accepted_issuers(gid, user)
        self.reward(user, self.owner_of[gid], addrs, gid)
        self.settled.add((gid, user))
        request = self.requests.get((gid, user))
        self._emit("settled", gid=gid.hex(), user=user,
                   attrs=sorted(attrs),
                   pk_u=request.pk_u.encode().hex() if request else None)
        return True

    # -- queries ------------------------------------------------------------

    def accepted_issuers(self, gid: bytes, user: str) -> list[str]:
        return sorted({r.issuer for r in self.registry.get((gid, user), [])
                       if r.verdict == "accepted"})

    def accepted_records(self, gid: bytes, user: str) -> list[VerifiedKeyRecord]:
        return [r for r in self.registry.get((gid, user), []) if r.verdict == "accepted"]

    def attrs_of(self, gid: bytes, user: str) -> set[str]:
        return set(self.verified_attrs.get((gid, user), set()))

    def is_settled(self, gid: bytes, user: str) -> bool:
        return (gid, user) in self.settled

    def balance(self, addr: str) -> int:
        return self.balances.get(addr, 0)

    # -- journal ------------------------------------------------------------

    def journal_lines(self) -> list[str]:
        return [json.dumps(e, sort_keys=True) for e in self.events]

    def state_digest(self) -> str:
        state = {
            "seq": self.seq,
            "supply": self.total_supply,
            "treasury": self.treasury,
            "balances": sorted(self.balances.items()),
            "pool": sorted((u, g.hex(), v) for (u, g), v in self.pool.items()),
            "stakes": sorted(self.stakes.items()),
            "expects": sorted((g.hex(), v) for g, v in self.expects.items()),
            "verified": sorted(
                (g.hex(), u, sorted(a)) for (g, u), a in self.verified_attrs.items()),
            "settled": sorted((g.hex(), u) for g, u in self.settled),
        }
        return hashlib.sha256(json.dumps(state, sort_keys=True).encode()).hexdigest()


def replay_journal(gp: GlobalParams, lines: Iterable[str], min_stake: int = 100) -> Ledger:
    """Rebuild a ledger by re-applying a journal; raises on the first event
    whose re-execution diverges from the recorded one."""
    ledger = Ledger(gp, min_stake=min_stake)
    for line in lines:
        event = json.loads(line)
        op = event["op"]
        if op == "funded":
            ledger.fund(event["addr"], event["amount"])
        elif op == "authority-registered":
            pub = authority_pub_from_json(event["pub"])
            ledger.register_authority(TxContext(event["authority"], event["staked"]), pub)
        elif op == "expected":
            ledger.expect(TxContext(event["owner"]), bytes.fromhex(event["gid"]),
                          event["owner_val"], event["acp"])
        elif op == "deposited":
            ledger.deposit(TxContext(event["user"], event["amount"]),
                           bytes.fromhex(event["gid"]))
        elif op == "request-posted":
            ledger.post_request(TxContext(event["user"]), bytes.fromhex(event["gid"]),
                                G1Elem.decode(bytes.fromhex(event["pk_u"])), event["attrs"])
        elif op == "withdrawn":
            ledger.withdraw(TxContext(event["user"]), bytes.fromhex(event["gid"]))
        elif op in ("key-accepted", "key-slashed"):
            ek, proof = submission_from_json(event["envelope"])
            ledger.submit_key(TxContext(event["issuer"]), bytes.fromhex(event["gid"]),
                              event["user"], ek, proof)
        elif op == "rewarded":
            # settlement is driven off-transaction; re-trigger it here
            ledger.try_settle(bytes.fromhex(event["gid"]), event["user"])
        elif op == "settled":
            pass  # emitted by the try_settle replayed on the rewarded event
        else:
            raise LedgerError(f"unknown journal op {op!r}")
    return ledger
