"""Five-phase data-sharing flow run end to end in one process.

``run_instance`` drives owner, users, authorities, ledger and DSP through
setup, encrypt, request, verify and access for every configured user, each
under its own sharing-instance identifier (gid), producing a replayable
``Trace``.  All randomness flows from the scenario seed, so identical
configurations produce byte-identical traces.

Adversary tags switch on misbehaviour and record its outcome as typed trace
events:

* ``dishonest_authority[:<id>]`` — the authority submits a tampered proof;
  the ledger slashes its stake and records no attribute.
* ``cross_gid_colluders`` — two users whose instances each fail the policy
  pool their recovered keys; decryption rejects the mixed-instance set.
* ``impersonator`` — a user without a grant asks the DSP for someone else's
  object, with and without a forged possession token; both are denied.
* ``key_discloser`` — a settled user publishes its recovered keys; they
  neither satisfy the other instance's policy alone, nor combine with the
  other user's keys (different gid), nor unlock any DSP fetch.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from abeshare import accountability as acc
from abeshare import cpabe
from abeshare import dsp as dsp_mod
from abeshare import ledger as ledger_mod
from abeshare import policy as policy_mod
from abeshare.algebra import GROUP_ORDER

__all__ = [
    "ProtocolError",
    "UnknownAdversaryError",
    "ScenarioUser",
    "ScenarioConfig",
    "Trace",
    "ADVERSARY_TAGS",
    "inject_adversary",
    "run_instance",
    "replay",
    "first_divergence",
    "gamefi_scenario",
    "builtin_scenario",
    "scenario_to_json",
    "scenario_from_json",
]

ADVERSARY_TAGS = (
    "dishonest_authority",
    "cross_gid_colluders",
    "impersonator",
    "key_discloser",
)


class ProtocolError(ValueError):
    pass


class UnknownAdversaryError(ProtocolError):
    pass


@dataclass(frozen=True)
class ScenarioUser:
    address: str
    deposit: int
    attrs: tuple[str, ...]
    acp: Optional[str] = None  # per-instance policy override
    funding: Optional[int] = None  # defaults to the deposit


@dataclass(frozen=True)
class ScenarioConfig:
    authorities: tuple[str, ...]
    owner: str
    data: bytes
    acp: str
    owner_val: int
    users: tuple[ScenarioUser, ...]
    adversaries: tuple[str, ...] = ()
    seed: int = 0
    min_stake: int = 100
    stake: int = 100

    def validate(self) -> None:
        known = set(self.authorities)
        for user in self.users:
            if user.deposit <= 0:
                raise ProtocolError(f"user {user.address} must deposit a positive amount")
            acp = user.acp or self.acp
            for leaf in policy_mod.policy_leaves(policy_mod.parse_policy(acp)):
                if cpabe.authority_of(leaf) not in known:
                    raise ProtocolError(f"policy attribute {leaf!r} names an unknown authority")
        for tag in self.adversaries:
            base = tag.split(":", 1)[0]
            if base not in ADVERSARY_TAGS:
                raise UnknownAdversaryError(f"unknown adversary tag {tag!r}")


def inject_adversary(cfg: ScenarioConfig, tag: str) -> ScenarioConfig:
    """Return a copy of the scenario with one more adversary behaviour."""
    base = tag.split(":", 1)[0]
    if base not in ADVERSARY_TAGS:
        raise UnknownAdversaryError(f"unknown adversary tag {tag!r}")
    return replace(cfg, adversaries=cfg.adversaries + (tag,))


@dataclass
class Trace:
    events: list[dict] = field(default_factory=list)

    def add(self, phase: str, type_: str, **detail) -> dict:
        event = {"phase": phase, "type": type_, **detail}
        self.events.append(event)
        return event

    def to_json_lines(self) -> list[str]:
        return [json.dumps(e, sort_keys=True) for e in self.events]

    def digest(self) -> str:
        payload = "\n".join(self.to_json_lines()).encode()
        return hashlib.sha256(payload).hexdigest()

    def outcome_for(self, user: str) -> Optional[dict]:
        for event in reversed(self.events):
            if event.get("user") == user and event["type"] in ("data-recovered", "unsettled"):
                return event
        return None


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _gid_for(cfg: ScenarioConfig, user: ScenarioUser) -> bytes:
    return f"instance:{cfg.owner}:{user.address}".encode()


def run_instance(cfg: ScenarioConfig, _sink: Optional[dict] = None) -> Trace:
    """Execute the full flow for every configured user and return the trace.

    ``_sink``, when given, receives the live ledger and DSP objects after the
    run (used by the CLI for journal export and by tests)."""
    cfg.validate()
    rng = random.Random(cfg.seed)
    trace = Trace()
    adversaries = {t.split(":", 1)[0]: t for t in cfg.adversaries}

    dishonest_auth = None
    if "dishonest_authority" in adversaries:
        tag = adversaries["dishonest_authority"]
        dishonest_auth = tag.split(":", 1)[1] if ":" in tag else cfg.authorities[0]

    # setup: key material, funding, authority registration
    gp = cpabe.global_setup()
    ledger = ledger_mod.Ledger(gp, min_stake=cfg.min_stake)
    dsp = dsp_mod.Dsp()
    authorities = {aid: cpabe.auth_setup(gp, aid, rng) for aid in cfg.authorities}
    pks = {aid: a.pk for aid, a in authorities.items()}
    user_keys = {u.address: cpabe.user_keygen(gp, rng) for u in cfg.users}

    for aid in cfg.authorities:
        ledger.fund(aid, cfg.stake)
        ledger.register_authority(ledger_mod.TxContext(aid, cfg.stake), pks[aid])
        trace.add("setup", "authority-registered", authority=aid, seq=ledger.seq)
    for user in cfg.users:
        ledger.fund(user.address, user.funding if user.funding is not None else user.deposit)
    trace.add("setup", "parties-ready", authorities=list(cfg.authorities),
              users=[u.address for u in cfg.users], seq=ledger.seq)

    per_user: dict[str, dict] = {}

    for user in cfg.users:
        gid = _gid_for(cfg, user)
        acp = user.acp or cfg.acp
        pk_u = user_keys[user.address].pk_u
        state = {"gid": gid, "acp": acp, "settled": False, "keys": [], "hc": None}
        per_user[user.address] = state

        # encrypt: fresh hybrid ciphertext per instance, stored on the DSP
        hc = cpabe.hybrid_encrypt(gp, cfg.data, acp, pks, rng)
        state["hc"] = hc
        dsp.store(cfg.owner, gid, hc)
        ledger.expect(ledger_mod.TxContext(cfg.owner), gid, cfg.owner_val, acp)
        trace.add("encrypt", "stored", user=user.address, gid=gid.hex(),
                  ct_digest=_sha(hc.ct), rows=len(hc.abe.rows), seq=ledger.seq)

        # request: deposit, then post the key request
        ledger.deposit(ledger_mod.TxContext(user.address, user.deposit), gid)
        policy_attrs = set(policy_mod.policy_leaves(policy_mod.parse_policy(acp)))
        wanted = [a for a in user.attrs if a in policy_attrs]
        ledger.post_request(ledger_mod.TxContext(user.address), gid, pk_u, wanted)
        trace.add("request", "posted", user=user.address, gid=gid.hex(),
                  deposit=user.deposit, attrs=wanted, seq=ledger.seq)

        # verify: authorities answer the request; the ledger checks each key
        for attr in wanted:
            theta = cpabe.authority_of(attr)
            ek, witness = acc.abe_enc_key(gid, gp, attr, authorities[theta], pk_u, rng)
            proof = acc.gen_proofs(witness, gid, attr, pk_u, ek, gp, rng)
            if theta == dishonest_auth:
                proof = replace(proof, w1=(proof.w1 + 1) % GROUP_ORDER)
            try:
                verdict = ledger.submit_key(
                    ledger_mod.TxContext(theta), gid, user.address, ek, proof)
            except ledger_mod.LedgerError as exc:
                trace.add("verify", "submission-rejected", user=user.address,
                          issuer=theta, attr=attr, reason=type(exc).__name__, seq=ledger.seq)
                continue
            trace.add("verify", f"key-{verdict}", user=user.address, issuer=theta,
                      attr=attr, seq=ledger.seq)
            if verdict == "accepted" and not state["settled"]:
                try:
                    if ledger.try_settle(gid, user.address):
                        state["settled"] = True
                        trace.add("verify", "settled", user=user.address,
                                  gid=gid.hex(), seq=ledger.seq)
                except ledger_mod.InsufficientPoolError:
                    trace.add("verify", "settlement-blocked", user=user.address,
                              gid=gid.hex(), reason="insufficient-deposit", seq=ledger.seq)
                    break

        # access: fetch from the DSP with a grant token, recover keys, decrypt
        if state["settled"]:
            dsp.sync_grants(ledger.events)
            grant = dsp.grants()[(gid, user.address)]
            token = dsp_mod.make_grant_token(
                user_keys[user.address].y, pk_u, gid, user.address, grant.granted_at, rng)
            fetched = dsp.fetch(user.address, gid, token)
            keys = []
            for record in ledger.accepted_records(gid, user.address):
                issuer_pk = ledger.authority_pub[record.issuer]
                keys.append(acc.get_key(record.ek, gp, issuer_pk.a1,
                                        user_keys[user.address].y, issuer_pk))
            state["keys"] = keys
            recovered = cpabe.hybrid_decrypt(gp, fetched, keys)
            trace.add("access", "data-recovered", user=user.address, gid=gid.hex(),
                      ok=recovered == cfg.data, digest=_sha(recovered), seq=ledger.seq)
        else:
            reason = "policy-not-satisfied"
            if ledger.pool.get((user.address, gid), 0) > 0:
                try:
                    ledger.withdraw(ledger_mod.TxContext(user.address), gid)
                    trace.add("access", "deposit-withdrawn", user=user.address,
                              gid=gid.hex(), seq=ledger.seq)
                except ledger_mod.LedgerError as exc:
                    trace.add("access", "withdraw-failed", user=user.address,
                              gid=gid.hex(), reason=type(exc).__name__, seq=ledger.seq)
            trace.add("access", "unsettled", user=user.address, gid=gid.hex(),
                      reason=reason, seq=ledger.seq)

    _run_adversary_epilogues(cfg, adversaries, trace, gp, ledger, dsp, per_user, user_keys, rng)

    ledger.check_conservation()
    trace.add("epilogue", "conservation-checked", total=ledger.total_funds(),
              treasury=ledger.treasury, seq=ledger.seq)
    if _sink is not None:
        _sink["ledger"] = ledger
        _sink["dsp"] = dsp
        _sink["gp"] = gp
    return trace


def _recovered_or_local_keys(gp, ledger, state, user_addr, user_keys):
    # keys already recovered during access, else unblind from ledger records
    if state["keys"]:
        return state["keys"]
    keys = []
    for record in ledger.accepted_records(state["gid"], user_addr):
        issuer_pk = ledger.authority_pub[record.issuer]
        keys.append(acc.get_key(record.ek, gp, issuer_pk.a1, user_keys[user_addr].y, issuer_pk))
    return keys


def _run_adversary_epilogues(cfg, adversaries, trace, gp, ledger, dsp, per_user, user_keys, rng):
    if "dishonest_authority" in adversaries:
        trace.add("epilogue", "treasury-audit", treasury=ledger.treasury,
                  slashed=sorted(a for a in cfg.authorities if a not in ledger.stakes))

    if "cross_gid_colluders" in adversaries and len(cfg.users) >= 2:
        u1, u2 = cfg.users[0], cfg.users[1]
        s1, s2 = per_user[u1.address], per_user[u2.address]
        pooled = (_recovered_or_local_keys(gp, ledger, s1, u1.address, user_keys)
                  + _recovered_or_local_keys(gp, ledger, s2, u2.address, user_keys))
        try:
            cpabe.abe_decrypt(gp, s1["hc"].abe, pooled)
            outcome = "decrypted"  # must not happen
        except cpabe.MixedGidError:
            outcome = "rejected-mixed-gid"
        except cpabe.PolicyNotSatisfiedError:
            outcome = "rejected-policy"
        trace.add("epilogue", "collusion-attempt", users=[u1.address, u2.address],
                  outcome=outcome)

    if "impersonator" in adversaries and len(cfg.users) >= 2:
        victim = next((u for u in cfg.users if per_user[u.address]["settled"]), None)
        imp = next((u for u in cfg.users if not per_user[u.address]["settled"]), None)
        if victim is not None and imp is not None:
            gid_v = per_user[victim.address]["gid"]
            grant = dsp.grants().get((gid_v, victim.address))
            denials = []
            # forged token under the impersonator's own key, for the victim's grant
            if grant is not None:
                forged = dsp_mod.make_grant_token(
                    user_keys[imp.address].y, user_keys[imp.address].pk_u,
                    gid_v, victim.address, grant.granted_at, rng)
                try:
                    dsp.fetch(victim.address, gid_v, forged)
                    denials.append("forged-token-accepted")  # must not happen
                except dsp_mod.AccessDeniedError:
                    denials.append("forged-token-denied")
            # fetch as itself without any grant
            self_token = dsp_mod.make_grant_token(
                user_keys[imp.address].y, user_keys[imp.address].pk_u,
                gid_v, imp.address, 0, rng)
            try:
                dsp.fetch(imp.address, gid_v, self_token)
                denials.append("ungranted-fetch-accepted")  # must not happen
            except dsp_mod.AccessDeniedError:
                denials.append("ungranted-fetch-denied")
            trace.add("epilogue", "impersonation-attempt", impersonator=imp.address,
                      victim=victim.address, outcomes=denials)

    if "key_discloser" in adversaries and len(cfg.users) >= 2:
        discloser = next((u for u in cfg.users if per_user[u.address]["settled"]), None)
        receiver = next((u for u in cfg.users if not per_user[u.address]["settled"]), None)
        if discloser is not None and receiver is not None:
            disclosed = _recovered_or_local_keys(
                gp, ledger, per_user[discloser.address], discloser.address, user_keys)
            target = per_user[receiver.address]
            outcomes = {}
            try:
                cpabe.abe_decrypt(gp, target["hc"].abe, disclosed)
                outcomes["disclosed-alone"] = "decrypted"  # must not happen
            except cpabe.PolicyNotSatisfiedError:
                outcomes["disclosed-alone"] = "rejected-policy"
            except cpabe.MixedGidError:
                outcomes["disclosed-alone"] = "rejected-mixed-gid"
            own = _recovered_or_local_keys(gp, ledger, target, receiver.address, user_keys)
            try:
                cpabe.abe_decrypt(gp, target["hc"].abe, disclosed + own)
                outcomes["disclosed-combined"] = "decrypted"  # must not happen
            except cpabe.MixedGidError:
                outcomes["disclosed-combined"] = "rejected-mixed-gid"
            except cpabe.PolicyNotSatisfiedError:
                outcomes["disclosed-combined"] = "rejected-policy"
            # disclosed keys do not produce a DSP grant either
            gid_d = per_user[discloser.address]["gid"]
            token = dsp_mod.make_grant_token(
                user_keys[receiver.address].y, user_keys[receiver.address].pk_u,
                gid_d, receiver.address, 0, rng)
            try:
                dsp.fetch(receiver.address, gid_d, token)
                outcomes["dsp-fetch"] = "accepted"  # must not happen
            except dsp_mod.AccessDeniedError:
                outcomes["dsp-fetch"] = "denied"
            trace.add("epilogue", "key-disclosure-attempt", discloser=discloser.address,
                      receiver=receiver.address, outcomes=outcomes)


def replay(trace: Trace, cfg: ScenarioConfig) -> bool:
    """Re-run the scenario and compare digests with the given trace."""
    return run_instance(cfg).digest() == trace.digest()


def first_divergence(a: Trace, b: Trace) -> Optional[int]:
    """Index of the first differing trace event, None if equal (by content;
    a truncated prefix diverges at its length)."""
    for i, (ea, eb) in enumerate(zip(a.events, b.events)):
        if ea != eb:
            return i
    if len(a.events) != len(b.events):
        return min(len(a.events), len(b.events))
    return None


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

_GAMEFI_ACP = "( level25@AUTH1 OR cityLA@AUTH2 ) AND female@AUTH3"
_GAMEFI_DATA = json.dumps({
    "item": "skin",
    "nft": "0x5killous-dragon-skin",
    "owner": "player1",
    "transfer_code": "d4c0de-77",
}).encode()


def gamefi_scenario(seed: int = 7) -> ScenarioConfig:
    """In-game item sale: player1 sells a skin under an attribute policy;
    player2 qualifies and buys, player3 does not."""
    return ScenarioConfig(
        authorities=("AUTH1", "AUTH2", "AUTH3"),
        owner="player1",
        data=_GAMEFI_DATA,
        acp=_GAMEFI_ACP,
        owner_val=3,
        users=(
            ScenarioUser(address="player2", deposit=10,
                         attrs=("level25@AUTH1", "cityPHX@AUTH2", "female@AUTH3")),
            ScenarioUser(address="player3", deposit=10,
                         attrs=("level28@AUTH1", "cityLA@AUTH2", "male@AUTH3")),
        ),
        seed=seed,
    )


def builtin_scenario(name: str, seed: int = 7) -> ScenarioConfig:
    if name == "gamefi":
        return gamefi_scenario(seed)
    if name == "colluders":
        return ScenarioConfig(
            authorities=("AUTH1", "AUTH2"),
            owner="owner",
            data=b"shared-secret-payload",
            acp="a@AUTH1 AND b@AUTH2",
            owner_val=2,
            users=(
                ScenarioUser(address="colluder1", deposit=6, attrs=("a@AUTH1",)),
                ScenarioUser(address="colluder2", deposit=6, attrs=("b@AUTH2",)),
            ),
            adversaries=("cross_gid_colluders",),
            seed=seed,
        )
    if name == "discloser":
        return ScenarioConfig(
            authorities=("AUTH1", "AUTH2", "AUTH3"),
            owner="owner",
            data=b"licensed-content-blob",
            acp="a@AUTH1 AND b@AUTH2",
            owner_val=2,
            users=(
                ScenarioUser(address="discloser", deposit=8,
                             attrs=("a@AUTH1", "b@AUTH2")),
                ScenarioUser(address="receiver", deposit=8, attrs=("c@AUTH3",),
                             acp="a@AUTH1 AND c@AUTH3"),
            ),
            adversaries=("key_discloser",),
            seed=seed,
        )
    raise ProtocolError(f"unknown builtin scenario {name!r}")


# ---------------------------------------------------------------------------
# Scenario JSON
# ---------------------------------------------------------------------------

def scenario_to_json(cfg: ScenarioConfig) -> str:
    return json.dumps({
        "authorities": list(cfg.authorities),
        "owner": cfg.owner,
        "data_hex": cfg.data.hex(),
        "acp": cfg.acp,
        "owner_val": cfg.owner_val,
        "users": [
            {
                "address": u.address,
                "deposit": u.deposit,
                "attrs": list(u.attrs),
                **({"acp": u.acp} if u.acp else {}),
                **({"funding": u.funding} if u.funding is not None else {}),
            }
            for u in cfg.users
        ],
        "adversaries": list(cfg.adversaries),
        "seed": cfg.seed,
        "min_stake": cfg.min_stake,
        "stake": cfg.stake,
    }, indent=2, sort_keys=True)


def scenario_from_json(raw: str) -> ScenarioConfig:
    obj = json.loads(raw)
    if "data_hex" in obj:
        data = bytes.fromhex(obj["data_hex"])
    elif "data_text" in obj:
        data = obj["data_text"].encode()
    else:
        raise ProtocolError("scenario needs data_hex or data_text")
    cfg = ScenarioConfig(
        authorities=tuple(obj["authorities"]),
        owner=obj["owner"],
        data=data,
        acp=obj["acp"],
        owner_val=int(obj["owner_val"]),
        users=tuple(
            ScenarioUser(
                address=u["address"],
                deposit=int(u["deposit"]),
                attrs=tuple(u["attrs"]),
                acp=u.get("acp"),
                funding=u.get("funding"),
            )
            for u in obj["users"]
        ),
        adversaries=tuple(obj.get("adversaries", ())),
        seed=int(obj.get("seed", 0)),
        min_stake=int(obj.get("min_stake", 100)),
        stake=int(obj.get("stake", 100)),
    )
    cfg.validate()
    return cfg
