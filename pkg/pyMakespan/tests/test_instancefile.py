import os
import tempfile
from fractions import Fraction
from unittest import TestCase

from ..graphbalancing import GraphBalancingInstance, TreeDecomposition
from ..instance import INFEASIBLE, Assignment, Instance, InvalidInstance
from ..instancefile import InstanceFile
from ..reopt import ReoptInput


class TestInstanceFile(TestCase):
    def test_unrelated(self):
        inst = Instance.unrelated([[1, INFEASIBLE], [3, 2]])
        data = InstanceFile.encode_instance(inst)
        self.assertEqual(data["p"], [[1, None], [3, 2]])
        self.assertEqual(InstanceFile.decode_instance(data), inst)

    def test_uniform_speeds_are_pairs(self):
        inst = Instance.uniform([4, 2], [Fraction(3, 2), 1])
        data = InstanceFile.encode_instance(inst)
        self.assertEqual(data["speeds"], [[3, 2], [1, 1]])
        self.assertEqual(InstanceFile.decode_instance(data), inst)

    def test_uniform_with_matrix(self):
        inst = Instance.uniform([4, 2], [Fraction(3, 2), 1])
        data = InstanceFile.encode_instance(inst)
        data["p"] = [[[8, 3], [4, 3]], [4, 2]]
        self.assertEqual(InstanceFile.decode_instance(data), inst)
        data["p"] = [[1, 1], [4, 2]]
        with self.assertRaises(InvalidInstance):
            InstanceFile.decode_instance(data)

    def test_reopt_machine_ids(self):
        old = Instance.identical(3, [2, 2, 1])
        new = Instance.identical(2, [2, 1, 5])
        reopt = ReoptInput(old, new, Assignment([0, 1, 2]), [0, 1, 2], [0, 2, 7])
        data = InstanceFile.encode_reopt(reopt)
        self.assertEqual(data["machine_ids_old"], [0, 1, 2])
        self.assertEqual(data["machine_ids_new"], [0, 1])
        decoded = InstanceFile.decode_reopt(data)
        self.assertEqual(decoded.machine_map, (0, 1, None))
        self.assertEqual(decoded.sigma0, reopt.sigma0)
        self.assertEqual(decoded.old_machine, [0, None, None])

    def test_reopt_sigma0_names_machine_ids(self):
        data = {
            "old": InstanceFile.encode_instance(Instance.identical(2, [1, 1])),
            "new": InstanceFile.encode_instance(Instance.identical(1, [1, 1])),
            "sigma0": [20, 10],
            "machine_ids_old": [10, 20],
            "machine_ids_new": [20],
        }
        reopt = InstanceFile.decode_reopt(data)
        self.assertEqual(reopt.sigma0.sigma, (1, 0))
        self.assertEqual(reopt.old_machine, [0, None])

        data["sigma0"] = [30, 10]
        with self.assertRaises(InvalidInstance):
            InstanceFile.decode_reopt(data)

    def test_graph_and_decomposition(self):
        g = GraphBalancingInstance(3, [(0, 1, 2), (2, 2, 1)])
        self.assertEqual(
            InstanceFile.decode_graph(InstanceFile.encode_graph(g)).edges, g.edges
        )
        td = TreeDecomposition([[1, 0], [1, 2]], [(0, 1)], width=1)
        data = InstanceFile.encode_decomposition(td)
        self.assertEqual(data["bags"], [[0, 1], [1, 2]])
        decoded = InstanceFile.decode_decomposition(data)
        self.assertEqual(decoded.bags, td.bags)
        self.assertEqual(decoded.declared_width, 1)

    def test_assignment(self):
        a = Assignment([0, 2, 1])
        self.assertEqual(
            InstanceFile.decode_assignment(InstanceFile.encode_assignment(a)), a
        )

    def test_invalid_payloads(self):
        bad = [
            {"kind": "unrelated", "m": 1, "n": 1},
            {"kind": "unrelated", "m": 1, "n": 2, "p": [[1]]},
            {"kind": "unrelated", "m": 1, "n": 1, "p": [[-1]]},
            {"kind": "uniform", "m": 2, "n": 1, "base_times": [1], "speeds": [[1, 1]]},
            {"kind": "uniform", "m": 1, "n": 1, "base_times": [1], "speeds": [[1]]},
            {"kind": "sideways", "m": 1, "n": 0, "p": [[]]},
        ]
        for data in bad:
            with self.assertRaises(InvalidInstance):
                InstanceFile.decode_instance(data)
        with self.assertRaises(InvalidInstance):
            InstanceFile.decode_graph({"vertices": 2, "edges": [[0, 1]]})
        with self.assertRaises(InvalidInstance):
            InstanceFile.decode_assignment({"sigma": [0, -1]})

    def test_digest_ignores_key_order(self):
        first = {"kind": "identical", "m": 1, "n": 1, "p": [[3]]}
        second = {"p": [[3]], "n": 1, "m": 1, "kind": "identical"}
        self.assertEqual(InstanceFile.digest(first), InstanceFile.digest(second))
        self.assertEqual(len(InstanceFile.digest(first)), 64)
        second["p"] = [[4]]
        self.assertNotEqual(InstanceFile.digest(first), InstanceFile.digest(second))

    def test_load_and_dump(self):
        inst = Instance.identical(2, [3, 1])
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "instance.json")
            InstanceFile.dump(path, InstanceFile.encode_instance(inst))
            self.assertEqual(
                InstanceFile.load(path, InstanceFile.decode_instance), inst
            )

            with open(path, "w") as f:
                f.write("{not json")
            with self.assertRaises(InvalidInstance):
                InstanceFile.load(path)
