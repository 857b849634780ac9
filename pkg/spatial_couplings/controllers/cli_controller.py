"""
Controller de línea de comandos (Presentation Layer).

Subcomandos:
    infer        Ajusta un modelo a un dataset y lo guarda
    simulate     Genera un campo de expresión con un modelo fijo
    perturb      Knockout en tejido con informe JSON y CSVs
    selfcheck    Experimento de auto-consistencia
    consistency  Consistencia entre particiones del tejido

Códigos de salida: 0 éxito, 1 error de ejecución, 2 error de uso.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from spatial_couplings import __version__
from spatial_couplings.exceptions import (
    DegenerateStatisticError,
    GeneNotFoundError,
    InvalidInputError,
    SpatialCouplingsError
)
from spatial_couplings.factories.strategy_factory import SplitStrategyFactory
from spatial_couplings.models.expression import GeneExpressionMatrix, NormalizationConfig, RawDataset
from spatial_couplings.models.generation import GenerateConfig
from spatial_couplings.models.graph import GraphConfig, GraphMethod, SpatialGraph
from spatial_couplings.models.inference import FitConfig, InitScheme
from spatial_couplings.models.perturbation import UNPERTURBED, GeneRanking, PerturbationSpec, neighbor_label
from spatial_couplings.models.validation import SelfConsistencyConfig
from spatial_couplings.repositories.base_repository import format_float, write_matrix_csv
from spatial_couplings.repositories.dataset_repository import DatasetFormat, DatasetRepository
from spatial_couplings.repositories.model_repository import ModelRepository
from spatial_couplings.repositories.report_repository import ReportRepository
from spatial_couplings.services import model_core
from spatial_couplings.services.generation_service import GenerationService, hamiltonian
from spatial_couplings.services.graph_builder import block_diagonal, build_graph, grid_coordinates, mean_degrees
from spatial_couplings.services.inference_service import InferenceService
from spatial_couplings.services.normalization_service import crop, normalize, subset_genes
from spatial_couplings.services.perturbation_service import (
    delta_rankings,
    derive_signature,
    ranking_null,
    run_knockout,
    validate_against_observed
)
from spatial_couplings.services.validation_service import self_consistency, split_consistency
from spatial_couplings.utils.logging_config import configure_logging
from spatial_couplings.utils.settings import Settings

logger = logging.getLogger(__name__)

DEFAULT_GRID_RADIUS = 1.5


def _comma_list(kind):
    def parse(text: str):
        try:
            values = [kind(v.strip()) for v in text.split(',') if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list '{text}'") from None
        if not values:
            raise argparse.ArgumentTypeError("empty list")
        return values
    return parse


def _graph_options(parser: argparse.ArgumentParser, required: bool) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument('--radius', type=float, help='Radius graph (micrometers)')
    group.add_argument('--knn', type=int, help='k-nearest-neighbor graph')


def _fit_options(parser: argparse.ArgumentParser) -> None:
    defaults = FitConfig()
    parser.add_argument('--lr', type=float, default=defaults.learning_rate, help='Learning rate')
    parser.add_argument('--epochs', type=int, default=defaults.max_epochs, help='Maximum epochs')
    parser.add_argument('--tolerance', type=float, default=defaults.grad_tolerance, help='Gradient tolerance')
    parser.add_argument('--init', choices=[s.value for s in InitScheme], default=defaults.init_scheme.value)


def _box_options(parser: argparse.ArgumentParser) -> None:
    for name in ('xmin', 'xmax', 'ymin', 'ymax'):
        parser.add_argument(f'--{name}', type=float, default=None, help='Bounding box (strict)')


def _graph_config(args, max_shell: int, default_radius: Optional[float] = None) -> GraphConfig:
    if args.knn is not None:
        return GraphConfig(method=GraphMethod.KNN, k=args.knn, max_shell=max_shell)
    radius = args.radius if args.radius is not None else default_radius
    return GraphConfig(method=GraphMethod.RADIUS, radius=radius, max_shell=max_shell)


def _fit_config(args) -> FitConfig:
    return FitConfig(
        learning_rate=args.lr,
        max_epochs=args.epochs,
        grad_tolerance=args.tolerance,
        init_scheme=InitScheme(args.init),
        seed=args.seed
    )


class CliController:
    """
    Controller de la línea de comandos.

    Cada subcomando lee sus entradas con los repositorios, llama a los
    servicios y escribe artefactos; en stdout queda una línea por artefacto.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.models = ModelRepository()
        self.reports = ReportRepository()
        self.parser = self.build_parser()

    def build_parser(self) -> argparse.ArgumentParser:
        """Construye el parser con todos los subcomandos"""
        settings = self.settings
        parser = argparse.ArgumentParser(
            prog='spatial-couplings',
            description='Gene-gene interaction inference and counterfactual simulation on spatial data.'
        )
        parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
        parser.add_argument('--log-level', default=settings.log_level,
                            choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'], type=str.upper)
        commands = parser.add_subparsers(dest='command', required=True)

        infer = commands.add_parser('infer', help='Fit an interaction model')
        infer.add_argument('--counts', required=True)
        infer.add_argument('--coords', required=True)
        infer.add_argument('--format', choices=[f.value for f in DatasetFormat], default=DatasetFormat.DENSE_CSV.value)
        _graph_options(infer, required=True)
        infer.add_argument('--khops', type=int, default=1, help='Number of graph shells')
        _fit_options(infer)
        infer.add_argument('--seed', type=int, default=settings.seed)
        infer.add_argument('--min-cells', type=int, default=NormalizationConfig().min_cells_per_gene)
        infer.add_argument('--no-sphere', action='store_true', help='Skip the unit-sphere projection')
        _box_options(infer)
        infer.add_argument('--out', required=True, help='Model directory')
        infer.set_defaults(handler=self.infer)

        simulate = commands.add_parser('simulate', help='Generate an expression field')
        simulate.add_argument('--model', required=True)
        source = simulate.add_mutually_exclusive_group(required=True)
        source.add_argument('--coords')
        source.add_argument('--grid', type=int, help='Synthesize an NxN unit lattice')
        _graph_options(simulate, required=False)
        simulate.add_argument('--steps', type=int, default=GenerateConfig().max_steps)
        simulate.add_argument('--step-size', type=float, default=GenerateConfig().step_size)
        simulate.add_argument('--seed', type=int, default=settings.seed)
        simulate.add_argument('--freeze', help='CSV with spot_id,gene,value')
        simulate.add_argument('--out', required=True, help='Expression CSV')
        simulate.set_defaults(handler=self.simulate)

        perturb = commands.add_parser('perturb', help='In-tissue knockout')
        perturb.add_argument('--counts', required=True)
        perturb.add_argument('--coords', required=True)
        perturb.add_argument('--format', choices=[f.value for f in DatasetFormat], default=DatasetFormat.DENSE_CSV.value)
        perturb.add_argument('--model', required=True)
        perturb.add_argument('--gene', required=True)
        perturb.add_argument('--target', default='random')
        perturb.add_argument('--radii', type=_comma_list(float), default=[15.0, 30.0])
        perturb.add_argument('--signature-marker', default=None)
        perturb.add_argument('--signature-top', type=int, default=25)
        _graph_options(perturb, required=False)
        perturb.add_argument('--steps', type=int, default=GenerateConfig().max_steps)
        perturb.add_argument('--step-size', type=float, default=GenerateConfig().step_size)
        perturb.add_argument('--seed', type=int, default=settings.seed)
        perturb.add_argument('--min-cells', type=int, default=0)
        perturb.add_argument('--observed', help='Observed gene ranking, one gene per line')
        perturb.add_argument('--perms', type=int, default=1000)
        perturb.add_argument('--relax-baseline', action='store_true')
        perturb.add_argument('--out', required=True, help='Output directory')
        perturb.set_defaults(handler=self.perturb)

        selfcheck = commands.add_parser('selfcheck', help='Simulate-then-infer self-consistency')
        defaults = SelfConsistencyConfig()
        selfcheck.add_argument('--genes', type=int, default=defaults.n_genes)
        selfcheck.add_argument('--grid', type=int, default=defaults.grid_side)
        selfcheck.add_argument('--scale', type=float, default=defaults.coupling_scale)
        selfcheck.add_argument('--steps', type=int, default=defaults.generation.max_steps)
        selfcheck.add_argument('--step-size', type=float, default=defaults.generation.step_size)
        selfcheck.add_argument('--repeats', type=int, default=defaults.n_repeats)
        selfcheck.add_argument('--perms', type=int, default=defaults.n_perm)
        _fit_options(selfcheck)
        selfcheck.add_argument('--seed', type=int, default=settings.seed)
        selfcheck.add_argument('--workers', type=int, default=settings.workers)
        selfcheck.add_argument('--dump', help='Directory for per-repeat matrices')
        selfcheck.add_argument('--out', required=True, help='Report JSON')
        selfcheck.set_defaults(handler=self.selfcheck)

        consistency = commands.add_parser('consistency', help='Split consistency')
        consistency.add_argument('--counts', type=_comma_list(str), required=True)
        consistency.add_argument('--coords', type=_comma_list(str), required=True)
        consistency.add_argument('--format', choices=[f.value for f in DatasetFormat], default=DatasetFormat.DENSE_CSV.value)
        consistency.add_argument('--split', choices=['parity', 'by-file', 'random'], default='parity')
        consistency.add_argument('--split-repeats', type=int, default=1,
                                 help='Random splits pooled into one comparison (--split random)')
        _graph_options(consistency, required=True)
        consistency.add_argument('--khops', type=int, default=1)
        _fit_options(consistency)
        consistency.add_argument('--min-cells', type=int, default=NormalizationConfig().min_cells_per_gene)
        consistency.add_argument('--perms', type=int, default=1000)
        consistency.add_argument('--seed', type=int, default=settings.seed)
        consistency.add_argument('--workers', type=int, default=settings.workers)
        consistency.add_argument('--out', required=True, help='Report JSON')
        consistency.set_defaults(handler=self.consistency)
        return parser

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Ejecuta un subcomando.

        Returns:
            0 éxito, 1 error de ejecución, 2 error de uso
        """
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else 2

        configure_logging(args.log_level)
        try:
            for line in args.handler(args):
                print(line)
        except (SpatialCouplingsError, OSError) as exc:
            logger.debug("Command %s failed", args.command, exc_info=True)
            print(f"error: {exc}", file=sys.stderr)
            return 1
        return 0

    # ------------------------------------------------------------------
    # infer
    # ------------------------------------------------------------------

    def infer(self, args) -> List[str]:
        """Ajusta y guarda modelo + traza"""
        repository = DatasetRepository(DatasetFormat(args.format))
        raw = repository.load(args.counts, args.coords)
        raw = crop(raw, (args.xmin, args.xmax), (args.ymin, args.ymax))
        norm_config = NormalizationConfig(min_cells_per_gene=args.min_cells, sphere_project=not args.no_sphere)
        expr = normalize(raw, norm_config)
        graph_config = _graph_config(args, args.khops)
        graph = build_graph(raw.coordinates, graph_config)
        fit_config = _fit_config(args)

        service = InferenceService()
        if expr.sphere_normalized:
            model, trace = service.fit(expr, graph, fit_config)
        else:
            logger.warning("Fitting expression that is not on the unit sphere")
            stats = model_core.sufficient_statistics(expr, graph)
            model, trace = service.fit_statistics(stats, mean_degrees(graph), fit_config, gene_names=expr.gene_names)

        metadata = {
            'fit_config': fit_config.to_dict(),
            'graph_config': graph_config.to_dict(),
            'normalization': norm_config.to_dict(),
            'provenance': list(expr.provenance),
            'seed': args.seed,
            'n_spots': expr.n_spots,
            'counts': str(args.counts)
        }
        self.models.save(model, args.out, trace=trace, metadata=metadata)
        return [
            f"model: {args.out} ({model.n_genes} genes, {model.n_shells} shells)",
            f"trace: {len(trace)} epochs, stop reason {trace.stop_reason.value}, nll {trace.nll[-1]:.10g}"
        ]

    # ------------------------------------------------------------------
    # simulate
    # ------------------------------------------------------------------

    def _simulation_graph(self, args, n_shells: int) -> Tuple[List[str], SpatialGraph, dict]:
        if args.grid is not None:
            if args.grid < 1:
                raise InvalidInputError("--grid must be >= 1")
            coords = grid_coordinates(args.grid)
            spot_ids = [f's{i}' for i in range(coords.shape[0])]
            args.radius = args.radius if args.radius is not None or args.knn is not None else DEFAULT_GRID_RADIUS
        else:
            spot_ids, coords = DatasetRepository().read_coordinates(args.coords)
            if args.radius is None and args.knn is None:
                raise InvalidInputError("simulate --coords needs --radius or --knn")
        config = _graph_config(args, n_shells)
        return spot_ids, build_graph(coords, config), config.to_dict()

    def simulate(self, args) -> List[str]:
        """Genera un campo de expresión y su informe"""
        model = self.models.load(args.model)
        spot_ids, graph, graph_config = self._simulation_graph(args, model.n_shells)
        mask = None
        if args.freeze:
            mask = DatasetRepository().load_freeze(args.freeze, spot_ids, model.gene_names)
        gen_config = GenerateConfig(step_size=args.step_size, max_steps=args.steps, seed=args.seed)

        expr, trace = GenerationService().generate(model, graph, gen_config, mask=mask, spot_ids=spot_ids)
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_matrix_csv(out, expr.spot_ids, expr.gene_names, expr.values, 'spot_id')

        report_path = out.with_suffix('.json')
        config = {
            'model': str(args.model),
            'grid': args.grid,
            'coords': args.coords,
            'graph': graph_config,
            'generation': gen_config.to_dict(),
            'freeze': args.freeze,
            'frozen_entries': 0 if mask is None else int(mask.frozen.sum())
        }
        self.reports.save(ReportRepository.build(config, {'trace': trace.to_dict()}), report_path)
        return [f"expression: {out}", f"report: {report_path}"]

    # ------------------------------------------------------------------
    # perturb
    # ------------------------------------------------------------------

    @staticmethod
    def _read_observed(path: str) -> GeneRanking:
        genes = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
        return GeneRanking(genes=genes, scores=[float(len(genes) - i) for i in range(len(genes))])

    def perturb(self, args) -> List[str]:
        """Knockout en tejido: CSVs de campos, scores, capas y ranking, más informe"""
        model = self.models.load(args.model)
        if args.gene not in model.gene_names:
            raise GeneNotFoundError(args.gene)
        marker = args.signature_marker or args.gene
        if marker not in model.gene_names:
            raise GeneNotFoundError(marker)

        raw = DatasetRepository(DatasetFormat(args.format)).load(args.counts, args.coords)
        raw = subset_genes(raw, model.gene_names)
        expr = normalize(raw, NormalizationConfig(min_cells_per_gene=args.min_cells))
        signature = derive_signature(expr, marker, min(args.signature_top, expr.n_genes - 1))

        radii = tuple(args.radii)
        graph_config = _graph_config(args, model.n_shells, default_radius=radii[0])
        graph = build_graph(raw.coordinates, graph_config)
        spec = PerturbationSpec(
            gene=args.gene,
            target=None if args.target == 'random' else args.target,
            seed=args.seed,
            signature=signature
        )
        gen_config = GenerateConfig(step_size=args.step_size, max_steps=args.steps, seed=args.seed)
        result = run_knockout(expr, graph, model, spec, gen_config, radii, relax_baseline=args.relax_baseline)

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, values in (('before', result.before.values), ('after', result.after.values),
                             ('delta', result.delta)):
            path = out / f'{name}.csv'
            write_matrix_csv(path, expr.spot_ids, expr.gene_names, values, 'spot_id')
            written.append(path)

        scores_path = out / 'scores.csv'
        pd.DataFrame({
            name: ['' if v is None else format_float(v) for v in column]
            for name, column in result.score_trace.items()
        }).to_csv(scores_path, index=False)
        shells_path = out / 'shells.csv'
        pd.DataFrame({'spot_id': list(expr.spot_ids), 'label': list(result.shells.labels)}).to_csv(
            shells_path, index=False
        )
        written += [scores_path, shells_path]

        warnings = []
        results: Dict[str, object] = {
            'target': result.target_id,
            'shell_counts': result.shells.counts(),
            'signature': list(signature),
            'score_trace': result.score_trace,
            'generation': result.generation.to_dict(),
            'hamiltonian_before': hamiltonian(result.before, graph, model),
            'hamiltonian_after': hamiltonian(result.after, graph, model)
        }
        try:
            ranking = delta_rankings(result, neighbor_label(1), UNPERTURBED)
        except DegenerateStatisticError as exc:
            warnings.append(f"ranking not computed: {exc}")
            ranking = None
        if ranking is not None:
            ranking_path = out / 'ranking.csv'
            pd.DataFrame({
                'gene': list(ranking.genes), 'score': [format_float(s) for s in ranking.scores]
            }).to_csv(ranking_path, index=False)
            written.append(ranking_path)
            results['ranking'] = ranking.to_dict()
            if args.observed:
                observed = self._read_observed(args.observed)
                results['validation'] = validate_against_observed(ranking, observed).to_dict()
                results['validation_null'] = ranking_null(ranking, observed, n_perm=args.perms,
                                                          seed=args.seed).to_dict()

        config = {
            'counts': str(args.counts),
            'coords': str(args.coords),
            'format': args.format,
            'model': str(args.model),
            'perturbation': spec.to_dict(),
            'radii': list(radii),
            'signature_marker': marker,
            'signature_top': args.signature_top,
            'graph': graph_config.to_dict(),
            'generation': gen_config.to_dict(),
            'min_cells': args.min_cells,
            'relax_baseline': args.relax_baseline,
            'observed': args.observed,
            'perms': args.perms
        }
        report_path = out / 'report.json'
        self.reports.save(ReportRepository.build(config, results, warnings), report_path)
        written.append(report_path)
        return [f"wrote: {path}" for path in written]

    # ------------------------------------------------------------------
    # selfcheck
    # ------------------------------------------------------------------

    def selfcheck(self, args) -> List[str]:
        """Experimento de auto-consistencia"""
        config = SelfConsistencyConfig(
            n_genes=args.genes,
            grid_side=args.grid,
            coupling_scale=args.scale,
            generation=GenerateConfig(step_size=args.step_size, max_steps=args.steps, seed=args.seed),
            fit=_fit_config(args),
            n_repeats=args.repeats,
            seed=args.seed,
            n_perm=args.perms,
            n_workers=args.workers
        )
        report = self_consistency(config)
        payload = ReportRepository.build(report.config, report.to_dict(), report.warnings)
        self.reports.save(payload, args.out)
        lines = [f"report: {args.out}"]

        if args.dump:
            dump = Path(args.dump)
            for outcome in report.repeats:
                for role, model in outcome.models.items():
                    directory = dump / f'repeat{outcome.repeat}' / role
                    self.models.save(model, directory)
            lines.append(f"matrices: {dump}")

        median_fitted, median_raw = report.median_rho_fitted(), report.median_rho_raw()
        if median_fitted is not None and median_raw is not None:
            lines.append(f"median rho fitted {median_fitted:.4f}, raw baseline {median_raw:.4f}")
        return lines

    # ------------------------------------------------------------------
    # consistency
    # ------------------------------------------------------------------

    def _load_samples(self, args) -> Tuple[RawDataset, SpatialGraph, GraphConfig]:
        if len(args.counts) != len(args.coords):
            raise InvalidInputError("--counts and --coords need the same number of files")
        repository = DatasetRepository(DatasetFormat(args.format))
        graph_config = _graph_config(args, args.khops)
        if len(args.counts) == 1:
            raw = repository.load(args.counts[0], args.coords[0])
            return raw, build_graph(raw.coordinates, graph_config), graph_config

        raw = repository.load_many(args.counts, args.coords)
        # sin aristas entre muestras
        samples = list(dict.fromkeys(raw.sample_ids))
        sample_array = np.asarray(raw.sample_ids)
        graphs = [build_graph(raw.coordinates[sample_array == s], graph_config) for s in samples]
        return raw, block_diagonal(graphs), graph_config

    def consistency(self, args) -> List[str]:
        """Consistencia entre particiones"""
        if args.split_repeats != 1 and args.split != 'random':
            raise InvalidInputError("--split-repeats only applies to --split random")
        raw, graph, graph_config = self._load_samples(args)
        norm_config = NormalizationConfig(min_cells_per_gene=args.min_cells)
        expr: GeneExpressionMatrix = normalize(raw, norm_config)

        if args.split == 'by-file':
            if len(args.counts) < 2:
                raise InvalidInputError("--split by-file needs at least two counts files")
            strategy = SplitStrategyFactory.create_strategy('by-sample', {'sample_ids': raw.sample_ids})
        else:
            strategy = SplitStrategyFactory.create_strategy(
                args.split, {'seed': args.seed, 'n_repeats': args.split_repeats}
            )

        fit_config = _fit_config(args)
        report = split_consistency(expr, graph, strategy, fit_config, n_perm=args.perms,
                                   seed=args.seed, n_workers=args.workers)
        config = dict(report.config)
        config.update({
            'counts': list(args.counts),
            'coords': list(args.coords),
            'format': args.format,
            'split_option': args.split,
            'split_repeats': args.split_repeats,
            'graph': graph_config.to_dict(),
            'normalization': norm_config.to_dict()
        })
        self.reports.save(ReportRepository.build(config, report.to_dict(), report.warnings), args.out)
        return [f"report: {args.out}"] + [
            f"{pair.name}: rho {pair.final.statistic:.4f}" for pair in report.pairs if pair.final is not None
        ]


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Punto de entrada: ejecuta la CLI y devuelve el código de salida"""
    try:
        controller = CliController()
    except SpatialCouplingsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return controller.run(argv)
