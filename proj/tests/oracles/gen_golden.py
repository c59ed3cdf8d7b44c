#!/usr/bin/env python3
"""Independent byte-level oracle for the conformance vectors.

Recomputes every hash from the canonical field encoding with hashlib and every
difficulty update with fractions.Fraction, then writes
tests/data/golden_vectors.json. The C++ library is never consulted.
"""

import hashlib
import json
import math
import os
import random
import sys
from fractions import Fraction

TWO_256 = 1 << 256
MAX_TARGET = TWO_256 - 1

TAG_PUZZLE_H = 0x01
TAG_PUZZLE_Z = 0x02
TAG_LEADER_H = 0x03
TAG_VDF_STEP = 0x04
TAG_VDF_COMMIT = 0x05
TAG_POW_BLOCK = 0x10
TAG_NODE_LABEL = 0x20


def field(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def tagged(tag: int, *fields: bytes) -> bytes:
    return hashlib.sha256(bytes([tag]) + b"".join(field(f) for f in fields)).digest()


def be64(v: int) -> bytes:
    return v.to_bytes(8, "big")


def enc_rational(r: Fraction) -> bytes:
    assert r >= 0 and r.numerator < 2**64 and r.denominator < 2**64
    return be64(r.numerator) + be64(r.denominator)


def puzzle_z(h_rho: bytes, h_s: bytes) -> bytes:
    return tagged(TAG_PUZZLE_Z, h_rho, h_s)


def pow_hash(alpha: Fraction, h_rho: bytes, h_s: bytes, nonce: int) -> bytes:
    return tagged(TAG_PUZZLE_H, enc_rational(alpha), puzzle_z(h_rho, h_s), be64(nonce))


def derive_input(h_q: bytes, h_g: bytes) -> bytes:
    return tagged(TAG_PUZZLE_H, h_q, h_g)


def node_id(label: str) -> bytes:
    return tagged(TAG_NODE_LABEL, label.encode())


def pow_encode(b: dict) -> bytes:
    return (field(b["h_rho"]) + field(b["h_s"]) + field(be64(b["nonce"])) + field(enc_rational(b["alpha"]))
            + field(bytes([1 if b["is_pseudo"] else 0])) + field(b["miner"]))


def pow_id(b: dict) -> bytes:
    return tagged(TAG_POW_BLOCK, pow_encode(b))


def leader_hash(b: dict, vk: bytes) -> bytes:
    return tagged(TAG_LEADER_H, pow_encode(b), vk)


def leader_ticket(h: int, reward: Fraction, target: int) -> bool:
    if target <= 0:
        return False
    product = reward * target
    if product >= TWO_256:
        return h < MAX_TARGET
    return h < product


def ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def vdf_eval(vk: bytes, inp: bytes, zeta: int):
    m = ceil_sqrt(zeta)
    positions = [-(-k * zeta // m) for k in range(1, m + 1)]
    x, step, cps = inp, 0, []
    for end in positions:
        while step < end:
            x = hashlib.sha256(bytes([TAG_VDF_STEP]) + x).digest()
            step += 1
        cps.append(x)
    commit_fields = [vk, inp, be64(zeta), be64(len(cps))] + cps
    commitment = tagged(TAG_VDF_COMMIT, *commit_fields)
    return x, cps, commitment


def clamp(t: int):
    if t < 1:
        return 1, True
    if t > MAX_TARGET:
        return MAX_TARGET, True
    return t, False


def floor_mul(f: Fraction, t: int) -> int:
    return (f.numerator * t) // f.denominator


def eq12(eta, rewards, winner, target):
    if len(eta) < 2:
        return {"target": target, "fallback": "lone_validator", "clamped": False}
    eta_o = sum(e for j, e in enumerate(eta) if j != winner)
    rew_o = sum((r for j, r in enumerate(rewards) if j != winner), Fraction(0))
    if eta_o == 0 or rew_o == 0:
        return {"target": target, "fallback": "zero_denominator", "clamped": False}
    factor = Fraction(eta[winner], eta_o) * (rewards[winner] / rew_o)
    t, c = clamp(floor_mul(factor, target))
    return {"target": t, "fallback": "none", "clamped": c, "factor": factor}


def eq13(cap, stakes, winner, incoming, target):
    if len(cap) < 2:
        return {"target": target, "fallback": "lone_validator", "clamped": False}
    cap_o = sum(c for j, c in enumerate(cap) if j != winner)
    st_o = sum(s for j, s in enumerate(stakes) if j != winner)
    if st_o == 0:
        return {"target": target, "fallback": "zero_denominator", "clamped": False}
    if cap_o >= incoming:
        if cap_o == 0:
            return {"target": target, "fallback": "zero_denominator", "clamped": False}
        ratio = Fraction(cap[winner], cap_o)
    else:
        if cap[winner] == 0:
            return {"target": target, "fallback": "zero_denominator", "clamped": False}
        ratio = Fraction(cap_o, cap[winner])
    factor = ratio * Fraction(stakes[winner], st_o)
    t, c = clamp(floor_mul(factor, target))
    return {"target": t, "fallback": "none", "clamped": c, "factor": factor}


def hx(b: bytes) -> str:
    return b.hex()


def frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def main(out_path: str) -> None:
    rng = random.Random(0x5EED)
    rand_digest = lambda: bytes(rng.getrandbits(8) for _ in range(32))
    zero = bytes(32)

    puzzles = []
    fixed = [(Fraction(1, 10), zero, zero, 42, 1 << 255)]
    for _ in range(24):
        fixed.append((Fraction(rng.randint(0, 50), rng.randint(1, 50)), rand_digest(), rand_digest(),
                      rng.getrandbits(64), 1 << rng.randint(250, 256) if rng.random() < 0.9 else 0))
    for alpha, h_rho, h_s, nonce, target in fixed:
        target = min(target, MAX_TARGET)
        h = pow_hash(alpha, h_rho, h_s, nonce)
        puzzles.append({"alpha_m": frac(alpha), "h_rho": hx(h_rho), "h_s": hx(h_s), "nonce": nonce,
                        "target": format(target, "064x"), "z": hx(puzzle_z(h_rho, h_s)), "hash": hx(h),
                        "valid": target > 0 and int.from_bytes(h, "big") < target})

    inputs = [{"h_q": hx(zero), "h_g": hx(zero), "input": hx(derive_input(zero, zero))}]
    for _ in range(4):
        a, b = rand_digest(), rand_digest()
        inputs.append({"h_q": hx(a), "h_g": hx(b), "input": hx(derive_input(a, b))})

    tickets = []
    for k in range(24):
        blk = {"h_rho": rand_digest(), "h_s": rand_digest(), "nonce": rng.getrandbits(64),
               "alpha": Fraction(rng.randint(0, 9), rng.randint(1, 9)), "is_pseudo": rng.random() < 0.3,
               "miner": node_id(f"miner-{k}")}
        vk = bytes(rng.getrandbits(8) for _ in range(rng.choice([1, 16, 32])))
        reward = Fraction(rng.randint(0, 12), rng.randint(1, 4))
        target = [0, 1 << 252, 1 << 254, 1 << 255, MAX_TARGET][k % 5]
        h = leader_hash(blk, vk)
        tickets.append({"pow": {"h_rho": hx(blk["h_rho"]), "h_s": hx(blk["h_s"]), "nonce": blk["nonce"],
                                "alpha_m": frac(blk["alpha"]), "is_pseudo": blk["is_pseudo"],
                                "miner": hx(blk["miner"]), "id": hx(pow_id(blk))},
                        "v_k": hx(vk), "reward": frac(reward), "target": format(target, "064x"),
                        "hash": hx(h), "eligible": leader_ticket(int.from_bytes(h, "big"), reward, target)})

    vdfs = []
    for zeta in (1, 2, 5, 16, 17, 100, 1000):
        vk = node_id(f"vk-{zeta}")
        inp = derive_input(node_id(f"hq-{zeta}"), node_id(f"hg-{zeta}"))
        out, cps, commitment = vdf_eval(vk, inp, zeta)
        vdfs.append({"v_k": hx(vk), "input": hx(inp), "iterations": zeta, "output": hx(out),
                     "checkpoints": [hx(c) for c in cps], "commitment": hx(commitment)})

    eq12_cases, eq13_cases = [], []
    for _ in range(1000):
        n = rng.randint(1, 6)
        eta = [rng.randint(0, 1 << 16) for _ in range(n)]
        rewards = [Fraction(rng.randint(0, 1 << 16), rng.randint(1, 1 << 16)) for _ in range(n)]
        winner = rng.randrange(n)
        target = rng.randint(1, MAX_TARGET) if rng.random() < 0.8 else 1 << rng.randint(0, 255)
        r = eq12(eta, rewards, winner, target)
        eq12_cases.append({"eta_x": eta, "reward": [frac(x) for x in rewards], "winner": winner,
                           "target": format(target, "064x"), "expect": format(r["target"], "064x"),
                           "fallback": r["fallback"], "clamped": r["clamped"]})
    for _ in range(1000):
        n = rng.randint(1, 6)
        cap = [rng.randint(0, 1 << 16) for _ in range(n)]
        stakes = [rng.randint(0, 1 << 16) for _ in range(n)]
        winner = rng.randrange(n)
        incoming = rng.randint(0, 1 << 17)
        target = rng.randint(1, MAX_TARGET) if rng.random() < 0.8 else 1 << rng.randint(0, 255)
        r = eq13(cap, stakes, winner, incoming, target)
        eq13_cases.append({"extra_capacity": cap, "stakes": stakes, "winner": winner, "incoming": incoming,
                           "target": format(target, "064x"), "expect": format(r["target"], "064x"),
                           "fallback": r["fallback"], "clamped": r["clamped"]})

    doc = {"schema_version": 1, "puzzles": puzzles, "derive_input": inputs, "leader_tickets": tickets,
           "vdf": vdfs, "pow_difficulty": eq12_cases, "pos_difficulty": eq13_cases,
           "node_ids": [{"label": s, "id": hx(node_id(s))} for s in ("genesis", "alice", "train-server")]}
    with open(out_path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    here = os.path.dirname(os.path.abspath(__file__))
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "..", "data", "golden_vectors.json"))
