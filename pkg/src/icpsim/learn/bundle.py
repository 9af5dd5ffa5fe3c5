"""Versioned JSON persistence for trained policy bundles.

The on-disk layout is deterministic (sorted entries, sorted keys) so a
re-run that produces the same tables produces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..channel import ChannelMode, map_from_line, map_to_line
from .rollout import PolicyBundle
from .tables import MessageStrategy, QHeads, sync_targets

BUNDLE_FORMAT = "icpsim-bundle-v1"


def _ctx_to_json(ctx):
    if ctx is None:
        return {"t": "none"}
    if isinstance(ctx, bool):
        return {"t": "bool", "v": ctx}
    if isinstance(ctx, int):
        return {"t": "int", "v": int(ctx)}
    if isinstance(ctx, str):
        return {"t": "str", "v": ctx}
    if isinstance(ctx, tuple):
        return {"t": "tuple", "v": [_ctx_to_json(x) for x in ctx]}
    raise TypeError(f"cannot serialize context of type {type(ctx).__name__}")


def _ctx_from_json(obj):
    tag = obj["t"]
    if tag == "none":
        return None
    if tag == "bool":
        return bool(obj["v"])
    if tag == "int":
        return int(obj["v"])
    if tag == "str":
        return obj["v"]
    if tag == "tuple":
        return tuple(_ctx_from_json(x) for x in obj["v"])
    raise ValueError(f"unknown context tag {tag!r}")


def _table_to_json(table: dict) -> list:
    entries = [(key.hex(), int(action), float(value))
               for (key, action), value in table.items()]
    entries.sort()
    return [list(e) for e in entries]


def _table_from_json(entries) -> dict:
    return {(bytes.fromhex(hexkey), int(action)): float(value)
            for hexkey, action, value in entries}


def bundle_to_dict(bundle: PolicyBundle) -> dict:
    if bundle.heads is None:
        raise ValueError("bundle has no tables to save")
    strategy = None
    if bundle.strategy is not None:
        items = sorted(
            ((_ctx_to_json(ctx), int(m)) for ctx, m in bundle.strategy.table.items()),
            key=lambda pair: json.dumps(pair[0], sort_keys=True))
        strategy = {"k": bundle.strategy.k,
                    "frozen": bundle.strategy.frozen,
                    "items": [list(p) for p in items]}
    return {
        "format": BUNDLE_FORMAT,
        "kind": bundle.kind,
        "mode": bundle.mode.value,
        "compact_keys": bundle.compact_keys,
        "message_size": bundle.message_size,
        "default_q": bundle.heads.default,
        "q_action": _table_to_json(bundle.heads.q_action),
        "q_message": _table_to_json(bundle.heads.q_message),
        "imap": None if bundle.imap is None else map_to_line(bundle.imap),
        "strategy": strategy,
        "config_echo": bundle.config_echo,
        "env_echo": bundle.env_echo,
    }


def bundle_from_dict(data: dict) -> PolicyBundle:
    if data.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported bundle format {data.get('format')!r}")
    heads = QHeads(default=float(data["default_q"]),
                   q_action=_table_from_json(data["q_action"]),
                   q_message=_table_from_json(data["q_message"]))
    sync_targets(heads)
    strategy = None
    if data["strategy"] is not None:
        s = data["strategy"]
        table = {_ctx_from_json(ctx): int(m) for ctx, m in s["items"]}
        strategy = MessageStrategy(table=table, k=int(s["k"]),
                                   frozen=bool(s["frozen"]))
    imap = None if data["imap"] is None else map_from_line(data["imap"])
    return PolicyBundle(kind=data["kind"], mode=ChannelMode(data["mode"]),
                        heads=heads, imap=imap, strategy=strategy,
                        compact_keys=bool(data["compact_keys"]),
                        message_size=data["message_size"],
                        config_echo=dict(data.get("config_echo", {})),
                        env_echo=dict(data.get("env_echo", {})))


def save_bundle(bundle: PolicyBundle, path) -> None:
    text = json.dumps(bundle_to_dict(bundle), sort_keys=True, indent=1)
    Path(path).write_text(text + "\n")


def load_bundle(path) -> PolicyBundle:
    return bundle_from_dict(json.loads(Path(path).read_text()))
