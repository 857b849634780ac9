"""
Pruebas unitarias para la línea de comandos.

Los subcomandos se ejecutan con configuraciones mínimas sobre ficheros
temporales; solo se comprueban códigos de salida y artefactos.
"""

import io
import json
import unittest
import sys
import os
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest.mock import patch

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from spatial_couplings.exceptions import DegenerateStatisticError
from spatial_couplings.models.expression import RawDataset
from spatial_couplings.repositories.base_repository import read_matrix_csv
from spatial_couplings.repositories.dataset_repository import DatasetRepository
from spatial_couplings.repositories.model_repository import ModelRepository
from spatial_couplings.services.graph_builder import grid_coordinates
from spatial_couplings.controllers.cli_controller import run
from spatial_couplings.utils.settings import Settings


def run_quiet(argv):
    """Ejecuta la CLI capturando stdout y stderr"""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run(argv)
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    """Suite de pruebas para la CLI"""

    def setUp(self):
        """Configuración antes de cada prueba"""
        Settings.reset_instance()
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

        rng = np.random.default_rng(0)
        counts = rng.integers(1, 10, size=(16, 4)).astype(float)
        # el gen g0 solo se expresa en los spots pares
        counts[1::2, 0] = 0.0
        data = RawDataset(
            counts=counts,
            spot_ids=[f's{i}' for i in range(16)],
            gene_names=['g0', 'g1', 'g2', 'g3'],
            coordinates=grid_coordinates(4)
        )
        self.counts = str(self.root / 'counts.csv')
        self.coords = str(self.root / 'coords.csv')
        DatasetRepository().save(data, self.counts, coords_path=self.coords)

    def tearDown(self):
        """Limpieza después de cada prueba"""
        self._tmp.cleanup()
        Settings.reset_instance()

    def infer(self):
        model_dir = str(self.root / 'model')
        code, out, err = run_quiet([
            'infer', '--counts', self.counts, '--coords', self.coords, '--radius', '1.5',
            '--min-cells', '0', '--epochs', '10', '--lr', '0.05', '--out', model_dir
        ])
        self.assertEqual(code, 0, err)
        return model_dir, out

    def test_unknown_flag_is_usage_error(self):
        """Verifica el código 2 con una opción desconocida"""
        code, _, err = run_quiet(['selfcheck', '--bogus', '--out', 'x.json'])

        self.assertEqual(code, 2)
        self.assertIn('--bogus', err)

    def test_missing_subcommand(self):
        """Verifica el código 2 sin subcomando"""
        code, _, _ = run_quiet([])

        self.assertEqual(code, 2)

    def test_infer_writes_model(self):
        """Verifica que infer guarda un modelo legible"""
        model_dir, out = self.infer()

        model = ModelRepository().load(model_dir)
        meta = ModelRepository().load_meta(model_dir)
        self.assertEqual(model.gene_names, ('g0', 'g1', 'g2', 'g3'))
        self.assertEqual(meta['n_spots'], 16)
        self.assertIsNotNone(ModelRepository().load_trace(model_dir))
        self.assertIn('model:', out)

    def test_simulate_on_grid(self):
        """Verifica la simulación sobre una retícula sintética"""
        model_dir, _ = self.infer()
        expression = self.root / 'sim' / 'expr.csv'

        code, _, err = run_quiet([
            'simulate', '--model', model_dir, '--grid', '3', '--steps', '5', '--out', str(expression)
        ])

        self.assertEqual(code, 0, err)
        report = json.loads(expression.with_suffix('.json').read_text())
        self.assertEqual(report['config']['grid'], 3)
        spots, genes, values = read_matrix_csv(expression)
        self.assertEqual(values.shape, (9, 4))
        np.testing.assert_allclose(np.linalg.norm(values, axis=1), 1.0, atol=1e-9)

    def test_perturb_unknown_gene(self):
        """Verifica el código 1 con un gen fuera del modelo"""
        model_dir, _ = self.infer()

        code, _, err = run_quiet([
            'perturb', '--counts', self.counts, '--coords', self.coords, '--model', model_dir,
            '--gene', 'Cux2', '--out', str(self.root / 'ko')
        ])

        self.assertEqual(code, 1)
        self.assertIn('Cux2', err)

    def test_perturb_writes_artifacts(self):
        """Verifica los CSVs y el informe del knockout"""
        model_dir, _ = self.infer()
        out = self.root / 'ko'

        code, _, err = run_quiet([
            'perturb', '--counts', self.counts, '--coords', self.coords, '--model', model_dir,
            '--gene', 'g0', '--radii', '1.5,3', '--steps', '5', '--out', str(out)
        ])

        self.assertEqual(code, 0, err)
        for name in ('before.csv', 'after.csv', 'delta.csv', 'scores.csv', 'shells.csv', 'report.json'):
            self.assertTrue((out / name).is_file(), name)
        report = json.loads((out / 'report.json').read_text())
        self.assertEqual(report['config']['radii'], [1.5, 3.0])
        self.assertIn(report['results']['target'], [f's{i}' for i in range(0, 16, 2)])

    def test_selfcheck_writes_report(self):
        """Verifica un selfcheck mínimo y el volcado de matrices"""
        report_path = self.root / 'selfcheck.json'
        dump = self.root / 'dump'

        code, _, err = run_quiet([
            'selfcheck', '--genes', '2', '--grid', '4', '--steps', '20', '--epochs', '20',
            '--lr', '0.05', '--repeats', '2', '--perms', '20', '--dump', str(dump),
            '--out', str(report_path)
        ])

        self.assertEqual(code, 0, err)
        report = json.loads(report_path.read_text())
        self.assertEqual(set(report), {'version', 'config', 'results', 'warnings', 'timestamp'})
        self.assertTrue((dump / 'repeat0' / 'fitted' / 'meta.json').is_file())

    def test_selfcheck_passes_resolved_config(self):
        """Verifica que las opciones llegan a la configuración y un error da código 1"""
        with patch('spatial_couplings.controllers.cli_controller.self_consistency',
                   side_effect=DegenerateStatisticError('constant truth')) as mock_run:
            code, _, err = run_quiet([
                'selfcheck', '--genes', '3', '--workers', '3', '--seed', '9',
                '--out', str(self.root / 'r.json')
            ])

        self.assertEqual(code, 1)
        self.assertIn('constant truth', err)
        config = mock_run.call_args[0][0]
        self.assertEqual((config.n_genes, config.n_workers, config.seed), (3, 3, 9))
        self.assertFalse((self.root / 'r.json').exists())

    @patch.dict(os.environ, {'SPATIAL_COUPLINGS_SEED': '5'})
    def test_seed_default_from_environment(self):
        """Verifica que la semilla por defecto sale de Settings"""
        with patch('spatial_couplings.controllers.cli_controller.self_consistency',
                   side_effect=DegenerateStatisticError('stop')) as mock_run:
            run_quiet(['selfcheck', '--out', str(self.root / 'r.json')])

        self.assertEqual(mock_run.call_args[0][0].seed, 5)

    def test_consistency_rejects_small_parts(self):
        """Verifica el código 1 cuando las partes tienen menos de 10 spots"""
        code, _, err = run_quiet([
            'consistency', '--counts', self.counts, '--coords', self.coords, '--radius', '1.5',
            '--min-cells', '0', '--epochs', '5', '--out', str(self.root / 'c.json')
        ])

        self.assertEqual(code, 1)
        self.assertIn('error:', err)

    def test_split_repeats_only_with_random(self):
        """Verifica el código 1 al repetir una partición que no es aleatoria"""
        code, _, err = run_quiet([
            'consistency', '--counts', self.counts, '--coords', self.coords, '--radius', '1.5',
            '--split', 'parity', '--split-repeats', '3', '--out', str(self.root / 'c.json')
        ])

        self.assertEqual(code, 1)
        self.assertIn('--split-repeats', err)

    def test_random_split_repeats_are_pooled(self):
        """Verifica que --split-repeats llega a la estrategia y al informe"""
        with patch('spatial_couplings.controllers.cli_controller.split_consistency',
                   side_effect=DegenerateStatisticError('stop')) as mock_run:
            code, _, _ = run_quiet([
                'consistency', '--counts', self.counts, '--coords', self.coords, '--radius', '1.5',
                '--min-cells', '0', '--split', 'random', '--split-repeats', '5', '--seed', '2',
                '--out', str(self.root / 'c.json')
            ])

        self.assertEqual(code, 1)
        strategy = mock_run.call_args[0][2]
        self.assertEqual((strategy.seed, strategy.n_repeats), (2, 5))


if __name__ == '__main__':
    unittest.main()
