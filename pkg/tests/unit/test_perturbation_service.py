"""
Pruebas unitarias para el laboratorio de perturbaciones: capas de vecinos,
firmas, knockout en tejido y validación de rankings.
"""

import unittest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from spatial_couplings.exceptions import (
    DegenerateStatisticError,
    GeneNotFoundError,
    IdMismatchError,
    InvalidInputError
)
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.generation import GenerateConfig
from spatial_couplings.models.interaction import InteractionModel
from spatial_couplings.models.perturbation import (
    PERTURBED,
    UNPERTURBED,
    GeneRanking,
    PerturbationSpec
)
from spatial_couplings.services.graph_builder import grid_coordinates, mean_degrees, radius_graph
from spatial_couplings.services.perturbation_service import (
    compare_lesions,
    delta_rankings,
    derive_signature,
    exclude_near,
    neighbor_shells_by_distance,
    observed_ranking,
    ranking_null,
    run_knockout,
    select_target,
    signature_score,
    validate_against_observed
)

SIGNATURE = ('sig0', 'sig1', 'sig2', 'sig3', 'sig4')
GENES = ('ko',) + SIGNATURE + ('o0', 'o1')


def knockout_setup():
    """
    Retícula 10×10 con un gen 'ko' acoplado a cinco genes de firma.

    Cada fila es el mismo vector unitario, punto fijo de la generación.
    """
    graph = radius_graph(grid_coordinates(10), 1.5)
    g_shell = np.zeros((8, 8))
    g_shell[0, 1:6] = 0.5
    g_shell[1:6, 0] = 0.5
    model = InteractionModel(
        g_intra=np.zeros((8, 8)), g_shells=(g_shell,), q_shells=mean_degrees(graph), gene_names=GENES
    )
    row = np.zeros(8)
    row[0] = 1.0 / np.sqrt(2.0)
    row[1:6] = 1.0 / np.sqrt(10.0)
    expr = GeneExpressionMatrix(
        values=np.tile(row, (100, 1)),
        spot_ids=[f's{i}' for i in range(100)],
        gene_names=GENES,
        sphere_normalized=True
    )
    return expr, graph, model


def small_expression(values, genes=None):
    values = np.asarray(values, dtype=float)
    return GeneExpressionMatrix(
        values=values,
        spot_ids=[f's{i}' for i in range(values.shape[0])],
        gene_names=genes or [f'g{j}' for j in range(values.shape[1])]
    )


class TestNeighborShells(unittest.TestCase):
    """Suite de pruebas para la clasificación por distancia"""

    def test_line_classification(self):
        """Verifica las clases de una línea de spots a distancia 0..5"""
        coords = np.column_stack([np.arange(6.0), np.zeros(6)])

        shells = neighbor_shells_by_distance(coords, 0, (1.5, 3.0))

        self.assertEqual(
            shells.labels,
            (PERTURBED, 'neighbor1', 'neighbor2', UNPERTURBED, UNPERTURBED, UNPERTURBED)
        )
        self.assertEqual(shells.counts()['neighbor2'], 1)

    def test_boundary_belongs_to_outer_shell(self):
        """Verifica que d = radio cae en la capa siguiente"""
        coords = np.array([[0.0, 0.0], [1.5, 0.0]])

        shells = neighbor_shells_by_distance(coords, 0, (1.5, 3.0))

        self.assertEqual(shells.labels[1], 'neighbor2')

    def test_coincident_spot_is_not_a_neighbor(self):
        """Verifica que un spot a distancia 0 no es vecino"""
        coords = np.array([[0.0, 0.0], [0.0, 0.0]])

        shells = neighbor_shells_by_distance(coords, 0, (1.0,))

        self.assertEqual(shells.labels[1], UNPERTURBED)

    def test_radii_must_increase(self):
        """Verifica que los radios deben ser estrictamente crecientes"""
        with self.assertRaises(InvalidInputError):
            neighbor_shells_by_distance(np.zeros((2, 2)), 0, (3.0, 1.5))


class TestSignatures(unittest.TestCase):
    """Suite de pruebas para firmas y scores"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        # marcador g0 positivo en los dos primeros spots
        self.expr = small_expression([
            [1.0, 0.9, 0.1, 0.5],
            [2.0, 0.7, 0.0, 0.5],
            [0.0, 0.1, 0.2, 0.5],
            [0.0, 0.0, 0.3, 0.5]
        ])

    def test_derive_signature_orders_by_difference(self):
        """Verifica el orden por diferencia de medias y la exclusión del marcador"""
        signature = derive_signature(self.expr, 'g0', top_n=3)

        self.assertEqual(signature, ('g1', 'g3', 'g2'))

    def test_signature_requires_both_groups(self):
        """Verifica el error cuando todos los spots expresan el marcador"""
        with self.assertRaises(DegenerateStatisticError):
            derive_signature(self.expr, 'g3', top_n=2)

    def test_signature_without_positive_spots(self):
        """Verifica el error cuando ningún spot expresa el marcador"""
        expr = small_expression(np.zeros((3, 3)))

        with self.assertRaises(DegenerateStatisticError):
            derive_signature(expr, 'g0', top_n=1)

    def test_signature_score_is_mean(self):
        """Verifica el score como media por spot"""
        np.testing.assert_allclose(signature_score(self.expr, ['g1', 'g3']), [0.7, 0.6, 0.3, 0.25])

    def test_unknown_gene(self):
        """Verifica GeneNotFoundError con un gen fuera del panel"""
        with self.assertRaises(GeneNotFoundError):
            signature_score(self.expr, ['Cux2'])


class TestTargetSelection(unittest.TestCase):
    """Suite de pruebas para la elección del spot objetivo"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        self.expr = small_expression([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])

    def test_random_target_expresses_gene(self):
        """Verifica que el objetivo aleatorio expresa el gen"""
        for seed in range(10):
            target = select_target(self.expr, PerturbationSpec(gene='g0', seed=seed))
            self.assertIn(target, (0, 2))

    def test_explicit_target_must_express_gene(self):
        """Verifica el error si el spot explícito no expresa el gen"""
        with self.assertRaises(InvalidInputError):
            select_target(self.expr, PerturbationSpec(gene='g0', target='s1'))

    def test_unknown_target(self):
        """Verifica el error con un spot inexistente"""
        with self.assertRaises(IdMismatchError):
            select_target(self.expr, PerturbationSpec(gene='g0', target='s9'))

    def test_exclude_near_is_strict(self):
        """Verifica que se descartan los spots a distancia < d"""
        coords = np.column_stack([np.arange(4.0), np.zeros(4)])

        keep = exclude_near(coords, [0], 2.0)

        np.testing.assert_array_equal(keep, [False, False, True, True])


class TestKnockout(unittest.TestCase):
    """Suite de pruebas para el knockout en tejido"""

    @classmethod
    def setUpClass(cls):
        """Ejecuta los knockouts una sola vez para toda la suite"""
        cls.expr, cls.graph, cls.model = knockout_setup()
        config = GenerateConfig(step_size=0.01, max_steps=200)
        cls.results = [
            run_knockout(
                cls.expr, cls.graph, cls.model,
                PerturbationSpec(gene='ko', seed=seed, signature=SIGNATURE),
                gen_config=config, radii=(1.5, 3.0)
            )
            for seed in range(10)
        ]

    def test_signature_decreases_in_first_shell(self):
        """Verifica que el score de la firma baja en la capa 1 entre el paso 0 y el final"""
        for result in self.results:
            trace = result.score_trace['neighbor1']
            self.assertLess(trace[-1], trace[0])

    def test_knocked_out_entry_is_zero(self):
        """Verifica que la entrada anulada sigue exactamente a cero"""
        for result in self.results:
            self.assertEqual(result.after.values[result.target, 0], 0.0)
            self.assertEqual(result.shells.labels[result.target], PERTURBED)

    def test_generation_trace_is_monotone(self):
        """Verifica ℋ no decreciente durante la relajación"""
        for result in self.results:
            self.assertTrue(result.generation.is_monotone())

    def test_delta_and_provenance(self):
        """Verifica delta = after - before y la procedencia"""
        result = self.results[0]

        np.testing.assert_array_equal(result.delta, result.after.values - result.before.values)
        self.assertEqual(result.after.provenance[-1], 'knockout')
        self.assertEqual(len(result.score_trace['step']), len(result.generation.steps))

    def test_delta_ranking(self):
        """Verifica que el gen anulado sube y la firma baja en los vecinos"""
        ranking = delta_rankings(self.results[0], 'neighbor1', UNPERTURBED)

        self.assertEqual(ranking.genes[0], 'ko')
        self.assertEqual(set(ranking.genes[-5:]), set(SIGNATURE))

    def test_gene_order_must_match_model(self):
        """Verifica que la expresión debe seguir el panel del modelo"""
        shuffled = GeneExpressionMatrix(
            values=self.expr.values[:, ::-1],
            spot_ids=self.expr.spot_ids,
            gene_names=GENES[::-1],
            sphere_normalized=True
        )

        with self.assertRaises(IdMismatchError):
            run_knockout(shuffled, self.graph, self.model, PerturbationSpec(gene='ko'))

    def test_derived_signature_needs_unexpressing_spots(self):
        """Verifica que sin firma explícita y con el gen en todos los spots no hay firma"""
        with self.assertRaises(DegenerateStatisticError):
            run_knockout(self.expr, self.graph, self.model, PerturbationSpec(gene='ko'),
                         gen_config=GenerateConfig(max_steps=1))


class TestRankingValidation(unittest.TestCase):
    """Suite de pruebas para la comparación con rankings observados"""

    def test_identical_rankings(self):
        """Verifica rho = 1 para rankings idénticos"""
        ranking = GeneRanking(genes=['a', 'b', 'c', 'd', 'e'], scores=[5, 4, 3, 2, 1])

        result = validate_against_observed(ranking, ranking)

        self.assertAlmostEqual(result.statistic, 1.0)

    def test_reversed_rankings(self):
        """Verifica rho = -1 para rankings invertidos"""
        predicted = GeneRanking(genes=['a', 'b', 'c', 'd'], scores=[4, 3, 2, 1])
        observed = GeneRanking(genes=['d', 'c', 'b', 'a'], scores=[4, 3, 2, 1])

        self.assertAlmostEqual(validate_against_observed(predicted, observed).statistic, -1.0)

    def test_gene_sets_must_match(self):
        """Verifica IdMismatchError si los rankings cubren genes distintos"""
        predicted = GeneRanking(genes=['a', 'b'], scores=[1, 0])
        observed = GeneRanking(genes=['a', 'c'], scores=[1, 0])

        with self.assertRaises(IdMismatchError):
            validate_against_observed(predicted, observed)

    def test_observed_ranking(self):
        """Verifica el ranking observado por diferencia de medias"""
        expr = small_expression([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]], genes=['a', 'b', 'c'])

        ranking = observed_ranking(expr, [0], [1])

        self.assertEqual(ranking.genes, ('c', 'a', 'b'))

    def test_ranking_null_and_lesion_comparison(self):
        """Verifica la nula por barajado y la comparación de varias lesiones"""
        genes = [f'g{i}' for i in range(12)]
        ranking = GeneRanking(genes=genes, scores=list(range(12, 0, -1)))

        summary = ranking_null(ranking, ranking, n_perm=200, seed=1)
        comparison = compare_lesions([(ranking, ranking)] * 3, n_perm=50, seed=0)

        self.assertAlmostEqual(summary.observed, 1.0)
        self.assertLess(summary.p_value, 0.05)
        self.assertEqual(len(comparison['observed']), 3)
        self.assertLess(comparison['comparison'].p_value, 0.05)


if __name__ == '__main__':
    unittest.main()
