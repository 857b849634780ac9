"""
Pruebas unitarias para el pipeline de normalización y los filtros.
"""

import unittest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from spatial_couplings.exceptions import GeneNotFoundError, InvalidInputError, ProjectionError
from spatial_couplings.models.expression import NormalizationConfig, RawDataset
from spatial_couplings.services.normalization_service import (
    crop,
    normalize,
    project_to_sphere,
    subset_genes
)


def raw(counts, coordinates=None):
    counts = np.asarray(counts, dtype=float)
    return RawDataset(
        counts=counts,
        spot_ids=[f's{i}' for i in range(counts.shape[0])],
        gene_names=[f'g{j}' for j in range(counts.shape[1])],
        coordinates=coordinates
    )


class TestNormalize(unittest.TestCase):
    """Suite de pruebas para normalize"""

    def test_cpm_rows_sum_to_one_million(self):
        """Verifica que CPM escala cada fila a 10^6"""
        config = NormalizationConfig(log1p=False, sphere_project=False, min_cells_per_gene=0)

        expr = normalize(raw([[1, 3], [5, 5]]), config)

        np.testing.assert_allclose(expr.values, [[2.5e5, 7.5e5], [5e5, 5e5]])
        self.assertFalse(expr.sphere_normalized)

    def test_log1p_after_cpm(self):
        """Verifica log(1 + CPM)"""
        config = NormalizationConfig(sphere_project=False, min_cells_per_gene=0)

        expr = normalize(raw([[1, 1]]), config)

        np.testing.assert_allclose(expr.values, np.log1p([[5e5, 5e5]]))

    def test_full_pipeline_and_provenance(self):
        """Verifica filas unitarias y la procedencia en orden"""
        expr = normalize(raw([[1, 2, 0], [3, 0, 4]]), NormalizationConfig(min_cells_per_gene=1))

        np.testing.assert_allclose(np.linalg.norm(expr.values, axis=1), 1.0)
        self.assertTrue(expr.sphere_normalized)
        self.assertTrue(expr.provenance[0].startswith('filter_genes('))
        self.assertTrue(expr.provenance[1].startswith('cpm('))
        self.assertEqual(expr.provenance[2:], ('log1p', 'sphere'))

    def test_gene_filter(self):
        """Verifica que se descartan los genes detectados en pocos spots"""
        expr = normalize(
            raw([[1, 0, 2], [1, 0, 0], [1, 3, 0]]),
            NormalizationConfig(min_cells_per_gene=2, sphere_project=False)
        )

        self.assertEqual(expr.gene_names, ('g0',))
        self.assertIn('dropped=2', expr.provenance[0])

    def test_filter_removing_everything(self):
        """Verifica el error cuando no queda ningún gen"""
        with self.assertRaises(InvalidInputError):
            normalize(raw([[1, 0], [0, 1]]), NormalizationConfig(min_cells_per_gene=3))

    def test_zero_spot_cannot_be_projected(self):
        """Verifica ProjectionError con un spot sin conteos"""
        with self.assertRaises(ProjectionError) as context:
            normalize(raw([[1, 2], [0, 0]]), NormalizationConfig(min_cells_per_gene=0))

        self.assertEqual(context.exception.spot_id, 's1')

    def test_zero_spot_allowed_without_projection(self):
        """Verifica que sin proyección un spot vacío queda a cero"""
        config = NormalizationConfig(min_cells_per_gene=0, sphere_project=False)

        expr = normalize(raw([[1, 2], [0, 0]]), config)

        np.testing.assert_array_equal(expr.values[1], [0.0, 0.0])

    def test_negative_min_cells(self):
        """Verifica la validación de la configuración"""
        with self.assertRaises(InvalidInputError):
            NormalizationConfig(min_cells_per_gene=-1)


class TestSphereProjection(unittest.TestCase):
    """Suite de pruebas para project_to_sphere"""

    def test_idempotent(self):
        """Verifica que proyectar dos veces no cambia el resultado"""
        config = NormalizationConfig(min_cells_per_gene=0, sphere_project=False)
        expr = normalize(raw([[3, 4, 1], [2, 2, 9]]), config)

        once = project_to_sphere(expr)
        twice = project_to_sphere(once)

        np.testing.assert_allclose(twice.values, once.values, atol=1e-15)
        self.assertEqual(once.provenance[-1], 'sphere')


class TestFilters(unittest.TestCase):
    """Suite de pruebas para crop y subset_genes"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        coords = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        self.data = raw(np.arange(8).reshape(4, 2), coordinates=coords)

    def test_crop_bounds_are_strict(self):
        """Verifica que los spots en el borde quedan fuera"""
        cropped = crop(self.data, x_range=(0.0, 3.0))

        self.assertEqual(cropped.spot_ids, ('s1', 's2'))
        np.testing.assert_array_equal(cropped.coordinates, [[1.0, 1.0], [2.0, 2.0]])

    def test_crop_open_bounds(self):
        """Verifica límites abiertos con None"""
        self.assertIs(crop(self.data), self.data)
        self.assertEqual(crop(self.data, y_range=(None, 1.5)).n_spots, 2)

    def test_crop_empty_box(self):
        """Verifica el error con una caja vacía"""
        with self.assertRaises(InvalidInputError):
            crop(self.data, x_range=(10.0, 20.0))

    def test_crop_needs_coordinates(self):
        """Verifica el error sin coordenadas"""
        with self.assertRaises(InvalidInputError):
            crop(raw([[1, 2]]), x_range=(0.0, 1.0))

    def test_subset_genes_keeps_order(self):
        """Verifica el panel en el orden pedido"""
        subset = subset_genes(self.data, ['g1', 'g0'])

        self.assertEqual(subset.gene_names, ('g1', 'g0'))
        np.testing.assert_array_equal(subset.counts[:, 0], [1, 3, 5, 7])

    def test_subset_unknown_gene(self):
        """Verifica GeneNotFoundError con un gen ausente"""
        with self.assertRaises(GeneNotFoundError):
            subset_genes(self.data, ['Cux2'])


if __name__ == '__main__':
    unittest.main()
