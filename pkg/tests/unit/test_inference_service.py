"""
Pruebas unitarias para InferenceService.

Estas pruebas validan:
- Descenso monótono de la pérdida
- Ajuste de un gen frente a la raíz por bisección
- Patrón Observer (eventos del ajuste)
"""

import unittest
from unittest.mock import Mock
import sys
import os

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.generation import GenerateConfig
from spatial_couplings.models.inference import FitConfig, InitScheme, StopReason
from spatial_couplings.models.interaction import InteractionModel, SufficientStatistics
from spatial_couplings.observers.events import FitEvent, Phase
from spatial_couplings.observers.subject import Observer
from spatial_couplings.services import model_core
from spatial_couplings.services.generation_service import generate
from spatial_couplings.services.graph_builder import grid_coordinates, mean_degrees, radius_graph
from spatial_couplings.services.inference_service import (
    InferenceService,
    fit,
    fit_statistics,
    init_model
)
from spatial_couplings.services.validation_service import sample_ground_truth


def sphere_expression(n_spots, n_genes, seed):
    values = np.random.default_rng(seed).standard_normal((n_spots, n_genes))
    values /= np.linalg.norm(values, axis=1, keepdims=True)
    return GeneExpressionMatrix(
        values=values,
        spot_ids=[f's{i}' for i in range(n_spots)],
        gene_names=[f'g{j}' for j in range(n_genes)],
        sphere_normalized=True
    )


def parameters(model):
    return np.concatenate([model.g_intra.ravel()] + [g.ravel() for g in model.g_shells])


class TestInitModel(unittest.TestCase):
    """Suite de pruebas para el modelo inicial"""

    def test_default_names_and_degrees(self):
        """Verifica nombres g0.. y q = 0 por defecto"""
        model = init_model(3, n_shells=2)

        self.assertEqual(model.gene_names, ('g0', 'g1', 'g2'))
        self.assertEqual(model.q_shells, (0.0, 0.0))
        self.assertFalse(np.any(model.g_intra))

    def test_uniform_scheme_is_seeded(self):
        """Verifica que la inicialización uniforme depende solo de la semilla"""
        first = init_model(3, scheme=InitScheme.UNIFORM, seed=4)
        second = init_model(3, scheme=InitScheme.UNIFORM, seed=4)

        np.testing.assert_array_equal(first.g_shells[0], second.g_shells[0])
        self.assertTrue(first.is_symmetric())

    def test_rejects_empty_panel(self):
        """Verifica que hace falta al menos un gen"""
        with self.assertRaises(InvalidInputError):
            init_model(0)


class TestFit(unittest.TestCase):
    """Suite de pruebas para el bucle de ajuste"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        self.graph = radius_graph(grid_coordinates(5), 1.5, max_shell=2)
        self.expr = sphere_expression(25, 3, seed=2)

    def test_trace_is_monotone(self):
        """Verifica que L nunca sube entre épocas aceptadas"""
        model, trace = fit(self.expr, self.graph, FitConfig(learning_rate=0.05, max_epochs=200))

        self.assertTrue(trace.is_monotone())
        self.assertEqual(trace.epochs[0], 0)
        self.assertIsNotNone(trace.stop_reason)
        self.assertTrue(model.is_symmetric())
        self.assertEqual(model.gene_names, self.expr.gene_names)

    def test_fit_is_deterministic(self):
        """Verifica que el mismo ajuste produce el mismo modelo"""
        config = FitConfig(max_epochs=50, init_scheme=InitScheme.UNIFORM, seed=3)

        first, _ = fit(self.expr, self.graph, config)
        second, _ = fit(self.expr, self.graph, config)

        np.testing.assert_array_equal(first.g_shells[1], second.g_shells[1])
        np.testing.assert_array_equal(first.g_intra, second.g_intra)

    def test_zero_epochs_returns_initial_model(self):
        """Verifica que max_epochs = 0 devuelve el modelo inicial"""
        model, trace = fit(self.expr, self.graph, FitConfig(max_epochs=0))

        self.assertFalse(np.any(model.g_shells[0]))
        self.assertEqual(len(trace), 1)
        self.assertEqual(trace.stop_reason, StopReason.MAX_ITERATIONS)

    def test_frozen_intra_is_untouched(self):
        """Verifica que con train_intra=False g' no cambia"""
        config = FitConfig(max_epochs=30, train_intra=False, init_scheme=InitScheme.UNIFORM, seed=1)
        initial = init_model(3, 2, InitScheme.UNIFORM, seed=1, gene_names=self.expr.gene_names)

        model, _ = fit(self.expr, self.graph, config)

        np.testing.assert_array_equal(model.g_intra, initial.g_intra)

    def test_requires_sphere_normalized_input(self):
        """Verifica que fit rechaza expresión sin normalizar a la esfera"""
        raw = GeneExpressionMatrix(
            values=self.expr.values * 2.0,
            spot_ids=self.expr.spot_ids,
            gene_names=self.expr.gene_names
        )

        with self.assertRaises(InvalidInputError):
            fit(raw, self.graph)

    def test_degree_count_must_match_shells(self):
        """Verifica el error cuando q no cubre todas las capas"""
        stats = model_core.sufficient_statistics(self.expr, self.graph)

        with self.assertRaises(DimensionMismatchError):
            fit_statistics(stats, [1.0])

    def test_converged_when_gradient_is_zero(self):
        """Verifica la parada inmediata si el gradiente inicial es nulo"""
        stats = SufficientStatistics(
            c_intra=np.zeros((2, 2)), c_shells=(np.zeros((2, 2)),), m=np.zeros(2), n_spots=4
        )

        _, trace = fit_statistics(stats, [2.0])

        self.assertEqual(trace.stop_reason, StopReason.CONVERGED)
        self.assertEqual(len(trace), 1)


class TestOneGeneFit(unittest.TestCase):
    """Suite de pruebas: ajuste de un gen contra la raíz por bisección"""

    def test_fit_matches_bisection_root(self):
        """Verifica |g_ajustado - g_biseccion| < 1e-4 desde varios puntos de partida"""
        q, m, n_spots = 4.0, 0.4, 30
        a = q * m
        config = FitConfig(
            learning_rate=0.5, max_epochs=5000, grad_tolerance=1e-9, train_intra=False
        )
        for target in (-0.6, 0.3, 0.9):
            c_exp = n_spots * a * (1.0 / np.tanh(a * target) - 1.0 / (a * target)) - 0.5 * q * n_spots * m * m
            stats = SufficientStatistics(
                c_intra=[[float(n_spots)]], c_shells=([[c_exp]],), m=[m], n_spots=n_spots
            )
            root = model_core.one_gene_root(m, q, n_spots, c_exp)
            for start in (-1.0, 0.0, 1.0):
                initial = InteractionModel(
                    g_intra=[[0.0]], g_shells=([[start]],), q_shells=(q,), gene_names=('a',)
                )

                model, trace = fit_statistics(stats, [q], config, initial_model=initial)

                self.assertLess(abs(model.g_shells[0][0, 0] - root), 1e-4)
                self.assertEqual(model.g_intra[0, 0], 0.0)
                self.assertTrue(trace.is_monotone())


class TestEmpiricalIdentifiability(unittest.TestCase):
    """Suite de pruebas: semillas distintas y datos sin estructura"""

    @classmethod
    def setUpClass(cls):
        """Campo generado con una verdad de 3 genes sobre una rejilla 20x20"""
        cls.graph = radius_graph(grid_coordinates(20), 1.5)
        truth = sample_ground_truth(3, 1, 0.1, np.random.default_rng(0), mean_degrees(cls.graph))
        cls.structured, _ = generate(truth, cls.graph, GenerateConfig(seed=2))

    def test_two_seeds_give_correlated_fits(self):
        """Verifica Pearson > 0.99 entre ajustes desde dos semillas uniformes"""
        first, _ = fit(self.structured, self.graph, FitConfig(init_scheme=InitScheme.UNIFORM, seed=1))
        second, _ = fit(self.structured, self.graph, FitConfig(init_scheme=InitScheme.UNIFORM, seed=2))

        self.assertGreater(np.corrcoef(first.flatten_shells(), second.flatten_shells())[0, 1], 0.99)
        # L es convexa: el descenso no separa los dos ajustes (norma de Frobenius)
        starts = [init_model(3, 1, InitScheme.UNIFORM, seed=s) for s in (1, 2)]
        self.assertLessEqual(
            np.linalg.norm(parameters(first) - parameters(second)),
            np.linalg.norm(parameters(starts[0]) - parameters(starts[1])) + 1e-9
        )

    def test_null_data_couplings_stay_small(self):
        """Verifica que filas uniformes independientes dan acoplamientos mucho menores"""
        null = sphere_expression(400, 3, seed=9)

        null_model, _ = fit(null, self.graph)
        structured_model, _ = fit(self.structured, self.graph)

        null_norm = np.max(np.abs(null_model.g_shells[0]))
        structured_norm = np.max(np.abs(structured_model.g_shells[0]))
        self.assertLess(null_norm, 0.25 * structured_norm)


class TestFitEvents(unittest.TestCase):
    """Suite de pruebas para el patrón Observer en el ajuste"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        self.graph = radius_graph(grid_coordinates(3), 1.5)
        self.expr = sphere_expression(9, 2, seed=0)

    def test_service_publishes_typed_events(self):
        """Verifica que un observador externo recibe inicio, épocas y fin como FitEvent"""
        service = InferenceService()
        observer = Mock(spec=Observer)
        service.attach(observer)

        _, trace = service.fit(self.expr, self.graph, FitConfig(max_epochs=5))

        events = [c.args[0] for c in observer.update.call_args_list]
        self.assertTrue(all(isinstance(e, FitEvent) for e in events))
        phases = [e.phase for e in events]
        self.assertEqual(phases[0], Phase.STARTED)
        self.assertEqual(phases[-1], Phase.FINISHED)
        self.assertEqual(phases.count(Phase.ACCEPTED), len(trace) - 1)
        self.assertEqual(events[-1].stop_reason, trace.stop_reason)
        self.assertEqual([e.epoch for e in events if e.is_state], trace.epochs)

    def test_internal_observers_are_detached(self):
        """Verifica que un segundo ajuste no repite los registros del primero"""
        service = InferenceService()
        service.fit(self.expr, self.graph, FitConfig(max_epochs=2))

        with self.assertLogs('spatial_couplings.observers.trace_observers', level='INFO') as logs:
            service.fit(self.expr, self.graph, FitConfig(max_epochs=2))

        self.assertEqual(sum('fit started' in line for line in logs.output), 1)


if __name__ == '__main__':
    unittest.main()
