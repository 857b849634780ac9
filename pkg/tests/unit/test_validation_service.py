"""
Pruebas unitarias para el arnés de validación: oráculo exacto,
auto-consistencia y consistencia entre particiones.
"""

import unittest
import sys
import os
from itertools import product

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from spatial_couplings.exceptions import InvalidInputError
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.generation import GenerateConfig
from spatial_couplings.models.inference import FitConfig
from spatial_couplings.models.interaction import InteractionModel
from spatial_couplings.models.validation import SelfConsistencyConfig
from spatial_couplings.services.generation_service import noise_initialization
from spatial_couplings.services.graph_builder import grid_coordinates, mean_degrees, radius_graph
from spatial_couplings.services.validation_service import (
    exact_log_partition,
    exact_oracle_nll,
    oracle_argmin_comparison,
    sample_ground_truth,
    self_consistency,
    sign_patterns,
    split_consistency
)
from spatial_couplings.strategies.split_strategy import MaskSplitStrategy, ParitySplitStrategy


def chain_graph(n_spots, max_shell=1):
    coords = np.column_stack([np.arange(float(n_spots)), np.zeros(n_spots)])
    return radius_graph(coords, 1.1, max_shell=max_shell)


def one_gene_model(g_intra, g_shells, q_shells):
    return InteractionModel(
        g_intra=[[g_intra]], g_shells=tuple([[g]] for g in g_shells), q_shells=q_shells, gene_names=['a']
    )


def sign_expression(signs):
    signs = np.asarray(signs, dtype=float)[:, None]
    return GeneExpressionMatrix(
        values=signs, spot_ids=[f's{i}' for i in range(signs.shape[0])], gene_names=['a'],
        sphere_normalized=True
    )


class TestExactOracle(unittest.TestCase):
    """Suite de pruebas para el oráculo por enumeración"""

    def test_sign_patterns_enumerate_all_states(self):
        """Verifica las 2^S configuraciones distintas"""
        patterns = sign_patterns(3)

        self.assertEqual(patterns.shape, (8, 3))
        self.assertEqual(len({tuple(p) for p in patterns}), 8)

    def test_zero_model(self):
        """Verifica log Z = S log 2 con acoplamientos nulos"""
        graph = chain_graph(5)
        model = one_gene_model(0.0, [0.0], mean_degrees(graph))

        self.assertAlmostEqual(exact_log_partition(model, graph), 5 * np.log(2.0), places=12)

    def test_single_spot_without_edges(self):
        """Verifica log Z = g' + log 2 para un spot aislado"""
        graph = chain_graph(1)
        model = one_gene_model(0.7, [0.3], mean_degrees(graph))

        self.assertAlmostEqual(exact_log_partition(model, graph), 0.7 + np.log(2.0), places=12)

    def test_matches_direct_enumeration(self):
        """Verifica log Z frente a una suma directa sobre estados y aristas"""
        graph = radius_graph(grid_coordinates(3)[:6], 1.5, max_shell=2)
        model = one_gene_model(0.2, [0.4, -0.3], mean_degrees(graph))

        total = 0.0
        for state in product((-1.0, 1.0), repeat=6):
            energy = 0.2 * 6
            for k, g in ((1, 0.4), (2, -0.3)):
                for i, j in graph.edges(k):
                    energy += 2.0 * g * state[i] * state[j]
            total += np.exp(energy)

        self.assertAlmostEqual(exact_log_partition(model, graph), np.log(total), places=10)

    def test_oracle_nll_subtracts_energy(self):
        """Verifica NLL exacta = log Z - ℋ(datos)"""
        graph = chain_graph(3)
        model = one_gene_model(0.0, [0.5], mean_degrees(graph))
        expr = sign_expression([1, 1, -1])

        # aristas (0,1) alineada y (1,2) opuesta: C = 2(1 - 1) = 0
        self.assertAlmostEqual(
            exact_oracle_nll(expr, model, graph), exact_log_partition(model, graph), places=12
        )

    def test_rejects_multiple_genes(self):
        """Verifica que el oráculo solo admite un gen"""
        graph = chain_graph(3)
        model = InteractionModel.zeros(['a', 'b'], mean_degrees(graph))

        with self.assertRaises(InvalidInputError):
            exact_log_partition(model, graph)

    def test_rejects_large_graphs(self):
        """Verifica que S > 10 se rechaza"""
        graph = radius_graph(grid_coordinates(4), 1.1)
        model = one_gene_model(0.0, [0.1], mean_degrees(graph))

        with self.assertRaises(InvalidInputError):
            exact_log_partition(model, graph)


class TestArgminComparison(unittest.TestCase):
    """Suite de pruebas para la comparación exacta frente a campo medio"""

    def test_interior_argmins_agree(self):
        """Verifica argmins interiores a menos de 0.15 en una cadena de 8 spots"""
        # 4 enlaces discordantes de 7: tanh(2g) = -1/7 en el modelo exacto;
        # campo medio con q = 1.75, m = 0.5: L(q|m||g|) = 1/28, g ≈ -0.1225
        graph = chain_graph(8)
        expr = sign_expression([1, 1, -1, 1, 1, -1, 1, 1])
        grid = np.linspace(-1.0, 1.0, 201)

        result = oracle_argmin_comparison(expr, graph, grid)

        self.assertTrue(result['exact_convex'])
        self.assertAlmostEqual(result['exact_argmin'], -np.arctanh(1.0 / 7.0) / 2.0, delta=0.01)
        self.assertAlmostEqual(result['mft_argmin'], -0.1225, delta=0.01)
        for key in ('exact_argmin', 'mft_argmin'):
            self.assertGreater(result[key], grid[0])
            self.assertLess(result[key], grid[-1])
        self.assertLessEqual(result['gap'], 0.15)

    def test_frustrated_chain_gap(self):
        """Verifica el gap conocido en la cadena (1, 1, -1): exacto 0, campo medio ≈ 1.144"""
        # límite del campo medio: con m ≠ 0 y C = 0 el mínimo se desplaza a g > 0
        graph = chain_graph(3)
        expr = sign_expression([1, 1, -1])

        result = oracle_argmin_comparison(expr, graph, np.linspace(-2.0, 2.0, 161))

        self.assertTrue(result['exact_convex'])
        self.assertAlmostEqual(result['exact_argmin'], 0.0, delta=1e-9)
        self.assertAlmostEqual(result['mft_argmin'], 1.144, delta=0.03)
        self.assertGreater(result['gap'], 1.0)

    def test_exact_log_partition_is_convex_in_g(self):
        """Verifica la convexidad de log Z exacta en otra instancia"""
        graph = radius_graph(grid_coordinates(3)[:6], 1.5)
        expr = sign_expression([1, -1, 1, 1, -1, -1])

        result = oracle_argmin_comparison(expr, graph, np.linspace(-2.0, 2.0, 21), g_intra=0.3)

        self.assertTrue(result['exact_convex'])
        self.assertEqual(len(result['mft_nll']), 21)

    def test_grid_needs_three_points(self):
        """Verifica que la rejilla necesita al menos 3 puntos"""
        with self.assertRaises(InvalidInputError):
            oracle_argmin_comparison(sign_expression([1, 1]), chain_graph(2), [0.0, 1.0])

    def test_single_shell_only(self):
        """Verifica que el barrido es de una sola capa"""
        with self.assertRaises(InvalidInputError):
            oracle_argmin_comparison(sign_expression([1, 1, 1]), chain_graph(3, max_shell=2), [0, 1, 2])


class TestGroundTruth(unittest.TestCase):
    """Suite de pruebas para el modelo verdad"""

    def test_symmetric_and_bounded(self):
        """Verifica simetría, cota y número de capas"""
        model = sample_ground_truth(4, 2, 0.1, np.random.default_rng(0), (8.0, 12.0))

        self.assertTrue(model.is_symmetric(tolerance=0.0))
        self.assertEqual(model.n_shells, 2)
        self.assertTrue(np.all(np.abs(model.g_shells[1]) <= 0.1))


class TestSelfConsistency(unittest.TestCase):
    """Suite de pruebas para el experimento simular-y-luego-inferir"""

    def small_config(self, **overrides):
        values = dict(
            n_genes=2, grid_side=4, generation=GenerateConfig(max_steps=20),
            fit=FitConfig(max_epochs=20, learning_rate=0.05), n_repeats=2, n_perm=20
        )
        values.update(overrides)
        return SelfConsistencyConfig(**values)

    def test_report_has_one_entry_per_repeat(self):
        """Verifica una entrada por repetición y los modelos de cada una"""
        report = self_consistency(self.small_config())

        self.assertEqual(len(report.repeats), 2)
        self.assertEqual(len(report.rho_fitted), 2)
        self.assertEqual(set(report.repeats[0].models), {'truth', 'fitted', 'raw'})
        self.assertIn('median_rho_fitted', report.to_dict())

    def test_report_does_not_depend_on_workers(self):
        """Verifica el mismo informe con uno o varios hilos"""
        serial = self_consistency(self.small_config())
        threaded = self_consistency(self.small_config(n_workers=2))

        self.assertEqual(serial.rho_fitted, threaded.rho_fitted)
        self.assertEqual(serial.rho_raw, threaded.rho_raw)
        for a, b in zip(serial.repeats, threaded.repeats):
            np.testing.assert_array_equal(a.models['fitted'].g_shells[0], b.models['fitted'].g_shells[0])

    def test_zero_truth_is_degenerate(self):
        """Verifica que una verdad constante marca la repetición y avisa"""
        report = self_consistency(self.small_config(coupling_scale=0.0))

        self.assertTrue(all(o.degenerate for o in report.repeats))
        self.assertEqual(len(report.warnings), 2)
        self.assertIsNone(report.median_rho_fitted())

    def test_invalid_config(self):
        """Verifica la validación de la configuración"""
        with self.assertRaises(InvalidInputError):
            SelfConsistencyConfig(n_genes=1)


class TestSplitConsistency(unittest.TestCase):
    """Suite de pruebas para la consistencia entre particiones"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        self.graph = radius_graph(grid_coordinates(4), 1.5)
        self.expr = GeneExpressionMatrix(
            values=noise_initialization((16, 3), seed=5),
            spot_ids=[f's{i}' for i in range(16)],
            gene_names=['a', 'b', 'c'],
            sphere_normalized=True
        )
        self.fit_config = FitConfig(max_epochs=20, learning_rate=0.05)

    def test_identical_parts_give_perfect_correlation(self):
        """Verifica rho = 1 cuando ambas partes son el tejido completo"""
        everything = np.ones(16, dtype=bool)
        strategy = MaskSplitStrategy(everything, everything)

        report = split_consistency(self.expr, self.graph, strategy, self.fit_config, n_perm=50)

        pair = report.pairs[0]
        self.assertAlmostEqual(pair.final.statistic, 1.0)
        self.assertIsNone(pair.curve[0])
        self.assertAlmostEqual(pair.curve[-1], 1.0)
        self.assertEqual(pair.sizes, (16, 16))
        self.assertIsNotNone(report.comparison)

    def test_empty_part_is_rejected(self):
        """Verifica el error con una parte vacía"""
        strategy = MaskSplitStrategy(np.ones(16, dtype=bool), np.zeros(16, dtype=bool))

        with self.assertRaises(InvalidInputError):
            split_consistency(self.expr, self.graph, strategy, self.fit_config)

    def test_small_part_is_rejected(self):
        """Verifica el error con partes de menos de 10 spots"""
        with self.assertRaises(InvalidInputError):
            split_consistency(self.expr, self.graph, ParitySplitStrategy(), self.fit_config)


if __name__ == '__main__':
    unittest.main()
