"""JSON file formats for instances, reoptimization inputs, graphs and schedules.

Every payload is validated with a voluptuous schema before it is turned into
library objects. Rationals are written as [numerator, denominator] pairs and
INFEASIBLE entries as null.
"""
import hashlib
import json
import logging
from fractions import Fraction
from typing import Any, Callable, Dict, Optional

from voluptuous import All, Any as AnyOf, Invalid, Length, Optional as Opt
from voluptuous import Range, Required, Schema

from .graphbalancing import GraphBalancingInstance, TreeDecomposition
from .instance import Assignment, Instance, InstanceKind, InvalidInstance
from .reopt import ReoptInput

_LOGGER = logging.getLogger(__name__)

NonNegative = All(int, Range(min=0))
Positive = All(int, Range(min=1))
RationalPair = All([Positive], Length(min=2, max=2))

MATRIX_SCHEMA = Schema(
    {
        Required("kind"): AnyOf("unrelated", "restricted", "identical"),
        Required("m"): Positive,
        Required("n"): NonNegative,
        Required("p"): [[AnyOf(None, NonNegative)]],
    }
)

UNIFORM_SCHEMA = Schema(
    {
        Required("kind"): "uniform",
        Required("m"): Positive,
        Required("n"): NonNegative,
        Required("base_times"): [Positive],
        Required("speeds"): [RationalPair],
        # derived from base_times and speeds, checked against them when present
        Opt("p"): [[AnyOf(Positive, RationalPair)]],
    }
)

INSTANCE_SCHEMA = AnyOf(MATRIX_SCHEMA, UNIFORM_SCHEMA)

REOPT_SCHEMA = Schema(
    {
        Required("old"): dict,
        Required("new"): dict,
        Required("sigma0"): [NonNegative],
        Opt("job_ids_old"): [NonNegative],
        Opt("job_ids_new"): [NonNegative],
        Opt("machine_ids_old"): [NonNegative],
        Opt("machine_ids_new"): [NonNegative],
        Opt("speed_ratio_bound"): AnyOf(Positive, RationalPair),
    }
)

GRAPH_SCHEMA = Schema(
    {
        Required("vertices"): NonNegative,
        Required("edges"): [All([int], Length(min=3, max=3))],
    }
)

DECOMPOSITION_SCHEMA = Schema(
    {
        Required("bags"): [[NonNegative]],
        Required("tree_edges"): [All([NonNegative], Length(min=2, max=2))],
        Opt("width"): NonNegative,
    }
)

ASSIGNMENT_SCHEMA = Schema({Required("sigma"): [NonNegative]})


def _rational(value) -> Fraction:
    if isinstance(value, list):
        return Fraction(value[0], value[1])
    return Fraction(value)


def _pair(value: Fraction) -> list:
    value = Fraction(value)
    return [value.numerator, value.denominator]


class InstanceFile:
    """Encoders and decoders for the JSON payloads."""

    @staticmethod
    def validate(schema: Callable, data: Any) -> Any:
        """Run a voluptuous schema, raising InvalidInstance on failure."""
        try:
            return schema(data)
        except Invalid as ex:
            raise InvalidInstance("malformed file: %s" % ex) from ex

    @staticmethod
    def encode_instance(inst: Instance) -> Dict:
        if inst.kind == InstanceKind.Uniform:
            return {
                "kind": inst.kind.value,
                "m": inst.m,
                "n": inst.n,
                "base_times": list(inst.base_times),
                "speeds": [_pair(s) for s in inst.speeds],
            }
        return {
            "kind": inst.kind.value,
            "m": inst.m,
            "n": inst.n,
            "p": [list(row) for row in inst.p],
        }

    @staticmethod
    def decode_instance(data: Dict) -> Instance:
        data = InstanceFile.validate(INSTANCE_SCHEMA, data)
        kind = InstanceKind(data["kind"])
        if kind == InstanceKind.Uniform:
            if len(data["speeds"]) != data["m"] or len(data["base_times"]) != data["n"]:
                raise InvalidInstance("speeds or base times disagree with m and n")
            inst = Instance.uniform(
                data["base_times"], [_rational(s) for s in data["speeds"]]
            )
            if "p" in data and [
                [_rational(x) for x in row] for row in data["p"]
            ] != [list(row) for row in inst.p]:
                raise InvalidInstance("p disagrees with base_times and speeds")
            return inst
        p = data["p"]
        if len(p) != data["m"] or any(len(row) != data["n"] for row in p):
            raise InvalidInstance("matrix is not %s x %s" % (data["m"], data["n"]))
        return Instance(kind, p)

    @staticmethod
    def encode_reopt(reopt: ReoptInput) -> Dict:
        removed = iter(range(reopt.m, reopt.m + reopt.m0))
        machine_ids_old = [
            i if i is not None else next(removed) for i in reopt.machine_map
        ]
        data = {
            "old": InstanceFile.encode_instance(reopt.old),
            "new": InstanceFile.encode_instance(reopt.new),
            "sigma0": [machine_ids_old[i] for i in reopt.sigma0],
            "job_ids_old": list(reopt.job_ids_old),
            "job_ids_new": list(reopt.job_ids_new),
            "machine_ids_old": machine_ids_old,
            "machine_ids_new": list(range(reopt.m)),
        }
        if reopt.speed_ratio_bound is not None:
            data["speed_ratio_bound"] = _pair(reopt.speed_ratio_bound)
        return data

    @staticmethod
    def decode_reopt(data: Dict) -> ReoptInput:
        """Build a ReoptInput; sigma0 holds machine IDs when IDs are given."""
        data = InstanceFile.validate(REOPT_SCHEMA, data)
        old = InstanceFile.decode_instance(data["old"])
        new = InstanceFile.decode_instance(data["new"])
        ids_old = data.get("machine_ids_old", list(range(old.m)))
        ids_new = data.get("machine_ids_new", list(range(new.m)))
        if len(ids_old) != old.m or len(ids_new) != new.m:
            raise InvalidInstance("machine id lists disagree with the instances")
        if len(set(ids_old)) != len(ids_old) or len(set(ids_new)) != len(ids_new):
            raise InvalidInstance("machine ids must be unique")
        old_index = {machine_id: i for i, machine_id in enumerate(ids_old)}
        new_index = {machine_id: i for i, machine_id in enumerate(ids_new)}
        try:
            sigma0 = Assignment(old_index[machine_id] for machine_id in data["sigma0"])
        except KeyError as ex:
            raise InvalidInstance("sigma0 names unknown machine %s" % ex) from ex
        bound = data.get("speed_ratio_bound")
        return ReoptInput(
            old,
            new,
            sigma0,
            job_ids_old=data.get("job_ids_old"),
            job_ids_new=data.get("job_ids_new"),
            speed_ratio_bound=_rational(bound) if bound is not None else None,
            machine_map=[new_index.get(machine_id) for machine_id in ids_old],
        )

    @staticmethod
    def encode_graph(g: GraphBalancingInstance) -> Dict:
        return {"vertices": g.vertices, "edges": [list(e) for e in g.edges]}

    @staticmethod
    def decode_graph(data: Dict) -> GraphBalancingInstance:
        data = InstanceFile.validate(GRAPH_SCHEMA, data)
        return GraphBalancingInstance(data["vertices"], data["edges"])

    @staticmethod
    def encode_decomposition(td: TreeDecomposition) -> Dict:
        data = {
            "bags": [sorted(bag) for bag in td.bags],
            "tree_edges": [list(e) for e in td.tree_edges],
        }  # type: Dict[str, Any]
        if td.declared_width is not None:
            data["width"] = td.declared_width
        return data

    @staticmethod
    def decode_decomposition(data: Dict) -> TreeDecomposition:
        data = InstanceFile.validate(DECOMPOSITION_SCHEMA, data)
        return TreeDecomposition(data["bags"], data["tree_edges"], data.get("width"))

    @staticmethod
    def encode_assignment(a: Assignment) -> Dict:
        return {"sigma": list(a.sigma)}

    @staticmethod
    def decode_assignment(data: Dict) -> Assignment:
        data = InstanceFile.validate(ASSIGNMENT_SCHEMA, data)
        return Assignment(data["sigma"])

    @staticmethod
    def canonical(data: Any) -> str:
        return json.dumps(data, separators=(",", ":"), sort_keys=True)

    @staticmethod
    def digest(data: Any) -> str:
        """sha256 of the canonical JSON text of data."""
        return hashlib.sha256(InstanceFile.canonical(data).encode("utf-8")).hexdigest()

    @staticmethod
    def load(path: str, decoder: Optional[Callable] = None) -> Any:
        """Read a JSON file, optionally decoding it.

        :raises InvalidInstance: if the file is not JSON or fails validation
        """
        try:
            with open(path) as f:
                data = json.load(f)
        except ValueError as ex:
            raise InvalidInstance("%s is not valid JSON: %s" % (path, ex)) from ex
        _LOGGER.debug("loaded %s", path)
        return decoder(data) if decoder is not None else data

    @staticmethod
    def dump(path: str, data: Any) -> None:
        with open(path, "w") as f:
            json.dump(data, f, sort_keys=True, indent=4)
            f.write("\n")
        _LOGGER.debug("wrote %s", path)
