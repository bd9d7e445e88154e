"""Ready-made schema encodings of the builtin metrics.

These demonstrate the derivation pipeline and back the equivalence
tests: compiling each preset must reproduce the hand-written zoo
implementation. Schema documents are bare root values (a list for set
roots), unlike the keyed zoo payloads; ``schema_payload`` adapts one to
the other.
"""

from __future__ import annotations

import copy
from typing import Mapping

from .errors import ConfigurationError

_MENTION = {"kind": "Record", "fields": {"left": "int", "right": "int"}}

_SUBSET_ENTITY_SIM = {
    "node": "Threshold",
    "inner": {"node": "SetMatch", "constraint": "1:1", "normalizer": "P"},
    "cutoff": 1.0,
    "strict": False,
}

PRESET_SCHEMAS: dict[str, dict] = {
    "rel_f1": {
        "types": {
            "Mention": _MENTION,
            "Relation": {
                "kind": "Record",
                "fields": {"type": "str", "subj": "Mention", "obj": "Mention"},
            },
            "RelationSet": {"kind": "Set", "element": "Relation"},
        },
        "metric": {"root": "RelationSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "uas": {
        "types": {
            "Dependency": {"kind": "Record", "fields": {"gov": "int", "dep": "int", "rel": "str"}},
            "Parse": {
                "kind": "Set",
                "element": "Dependency",
                "sim": {
                    "node": "SetMatch",
                    "constraint": "1:1",
                    "inner": {"node": "Product", "fields": {"gov": None, "dep": None}},
                },
            },
        },
        "metric": {"root": "Parse", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "las": {
        "types": {
            "Dependency": {"kind": "Record", "fields": {"gov": "int", "dep": "int", "rel": "str"}},
            "Parse": {"kind": "Set", "element": "Dependency"},
        },
        "metric": {"root": "Parse", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "trig_f1": {
        "types": {
            "Mention": _MENTION,
            "Trigger": {"kind": "Record", "fields": {"mention": "Mention", "type": "str"}},
            "Argument": {"kind": "Record", "fields": {"mention": "Mention", "role": "str"}},
            "ArgumentSet": {"kind": "Set", "element": "Argument"},
            "Event": {"kind": "Record", "fields": {"trigger": "Trigger", "args": "ArgumentSet"}},
            "EventSet": {
                "kind": "Set",
                "element": "Event",
                "sim": {
                    "node": "SetMatch",
                    "constraint": "1:1",
                    "inner": {"node": "Product", "fields": {"trigger": None}},
                },
            },
        },
        "metric": {"root": "EventSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "arg_f1": {
        "types": {
            "Mention": _MENTION,
            "Trigger": {"kind": "Record", "fields": {"mention": "Mention", "type": "str"}},
            "Argument": {"kind": "Record", "fields": {"mention": "Mention", "role": "str"}},
            "ArgumentSet": {"kind": "Set", "element": "Argument"},
            "Event": {"kind": "Record", "fields": {"trigger": "Trigger", "args": "ArgumentSet"}},
            "EventSet": {"kind": "Set", "element": "Event"},
        },
        "metric": {"root": "EventSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "ceaf_phi3": {
        "types": {
            "Mention": _MENTION,
            "Entity": {"kind": "Set", "element": "Mention"},
            "EntitySet": {"kind": "Set", "element": "Entity"},
        },
        "metric": {"root": "EntitySet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "ceaf_phi4": {
        "types": {
            "Mention": _MENTION,
            "Entity": {
                "kind": "Set",
                "element": "Mention",
                "sim": {"node": "SetMatch", "constraint": "1:1", "normalizer": "F"},
            },
            "EntitySet": {"kind": "Set", "element": "Entity"},
        },
        "metric": {"root": "EntitySet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "muc": {
        "types": {
            "Mention": _MENTION,
            "Entity": {"kind": "Set", "element": "Mention"},
            "EntitySet": {"kind": "Set", "element": "Entity", "sim": {"node": "Named", "id": "muc"}},
        },
        "metric": {"root": "EntitySet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "b3": {
        "types": {
            "Mention": _MENTION,
            "Entity": {"kind": "Set", "element": "Mention"},
            "EntitySet": {"kind": "Set", "element": "Entity", "sim": {"node": "Named", "id": "b3"}},
        },
        "metric": {"root": "EntitySet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "ceaf_ree": {
        "types": {
            "Entity": {"kind": "Set", "element": "str", "sim": _SUBSET_ENTITY_SIM},
            "RoleFiller": {"kind": "Record", "fields": {"role": "str", "entity": "Entity"}},
            "RoleFillerSet": {"kind": "Set", "element": "RoleFiller"},
        },
        "metric": {"root": "RoleFillerSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "ceaf_rme_subset": {
        "types": {
            "Entity": {"kind": "Set", "element": "str", "sim": _SUBSET_ENTITY_SIM},
            "RoleFiller": {"kind": "Record", "fields": {"role": "str", "entity": "Entity"}},
            "RoleFillerSet": {
                "kind": "Set",
                "element": "RoleFiller",
                "sim": {"node": "SetMatch", "constraint": "N:1"},
            },
        },
        "metric": {"root": "RoleFillerSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "ceaf_rme_phi3": {
        "types": {
            "Entity": {"kind": "Set", "element": "str"},
            "RoleFiller": {"kind": "Record", "fields": {"role": "str", "entity": "Entity"}},
            "RoleFillerSet": {
                "kind": "Set",
                "element": "RoleFiller",
                "sim": {"node": "SetMatch", "constraint": "N:1"},
            },
        },
        "metric": {"root": "RoleFillerSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "scirex": {
        "types": {
            "IndexMention": {
                "kind": "Set",
                "element": "int",
                "sim": {
                    "node": "Threshold",
                    "inner": {"node": "SetMatch", "constraint": "1:1", "normalizer": "J"},
                    "cutoff": 0.5,
                    "strict": True,
                },
            },
            "MentionSet": {
                "kind": "Set",
                "element": "IndexMention",
                "sim": {
                    "node": "Threshold",
                    "inner": {"node": "SetMatch", "constraint": "1:1", "normalizer": "P"},
                    "cutoff": 0.5,
                    "strict": True,
                },
            },
            "RoleFiller": {"kind": "Record", "fields": {"role": "str", "mentions": "MentionSet"}},
            "RoleFillerSet": {
                "kind": "Set",
                "element": "RoleFiller",
                "sim": {
                    "node": "Threshold",
                    "inner": {"node": "SetMatch", "constraint": "1:1", "normalizer": "F"},
                    "cutoff": 1.0,
                    "strict": False,
                },
            },
            "NAryRelation": {"kind": "Record", "fields": {"args": "RoleFillerSet"}},
            "RelationSet": {"kind": "Set", "element": "NAryRelation"},
        },
        "metric": {"root": "RelationSet", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
    "smatch": {
        "types": {
            "Var": {"kind": "Variable"},
            "Prop": {"kind": "Record", "fields": {"rel": "str", "subj": "Var", "obj": "Var"}},
            "AMR": {
                "kind": "Set",
                "element": "Prop",
                "sim": {"node": "LatentSetMatch", "constraint": "1:1", "var_fields": ["subj", "obj"]},
            },
        },
        "metric": {"root": "AMR", "report": ["P", "R", "F"], "aggregation": "micro"},
    },
}


def builtin_schema(name: str) -> dict:
    """A deep copy of the preset schema document for a builtin metric."""
    if name not in PRESET_SCHEMAS:
        raise ConfigurationError(f"no preset schema for {name!r}")
    return copy.deepcopy(PRESET_SCHEMAS[name])


_PAYLOAD_KEYS = {
    "rel_f1": "relations",
    "uas": "edges",
    "las": "edges",
    "trig_f1": "events",
    "arg_f1": "events",
    "ceaf_phi3": "entities",
    "ceaf_phi4": "entities",
    "muc": "entities",
    "b3": "entities",
    "ceaf_ree": "args",
    "ceaf_rme_subset": "args",
    "ceaf_rme_phi3": "args",
    "scirex": "relations",
    "smatch": "props",
}


def schema_payload(name: str, zoo_payload: Mapping):
    """Convert a keyed zoo payload to the preset schema's root value."""
    key = _PAYLOAD_KEYS[name]
    value = zoo_payload[key] if isinstance(zoo_payload, Mapping) else zoo_payload
    if name == "smatch":
        out = []
        for t in value:
            obj = t["obj"]
            if not isinstance(obj, Mapping):
                obj = {"concept": obj}
            out.append({"rel": t["rel"], "subj": {"var": t["subj"]}, "obj": obj})
        return out
    if name == "scirex":
        return [
            {"args": [{"role": a["role"], "mentions": a["entity"]} for a in r.get("args", [])]}
            for r in value
        ]
    return value
