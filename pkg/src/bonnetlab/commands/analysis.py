"""Commands that analyze a surface: invariants, classifications, lines, indices and checks."""

import logging

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from bonnetlab.commands import CommandResult, PipelineCommand, signed
from bonnetlab.config import (
    EPS_SCALE,
    FACT_TOLERANCE,
    INDEX_RADII,
    INDEX_TOLERANCE,
    ISOTHERMIC_TOLERANCE,
)
from bonnetlab.dataobjects import CheckResult
from bonnetlab.dataobjects.invariants import PointTag
from bonnetlab.dataobjects.run import Session
from bonnetlab.exception import ConfigError
from bonnetlab.export import downsample, write_grid_csv, write_obj, write_polylines
from bonnetlab.invariants import classify_point, point_invariants, trace_lines
from bonnetlab.mixedforms import (
    find_singular_points,
    global_checks,
    index,
    isothermicity_classify,
)
from bonnetlab.surface import eval_jet
from bonnetlab.utils import finite_max, sign_value
from bonnetlab.zoo import verify_facts

_logger = logging.getLogger(__name__)

CLASSIFICATION_EXPECTATIONS: Tuple[str, ...] = (
    'strong', 'strongly_totally_non', 'totally_non_minus', 'totally_non_plus'
)
"""Summary properties a ``[classify]`` table may expect."""


def _signs(options: Dict[str, Any], default: str = 'both') -> Tuple[str, ...]:
    sign = options.get('sign', default)
    if sign == 'both':
        return ('-', '+')
    if sign not in ('-', '+'):
        raise ConfigError(f'sign must be "-", "+" or "both", got {sign!r}')
    return (sign,)


def _range(values: np.ndarray) -> List[Optional[float]]:
    finite = np.asarray(values, dtype=float)[np.isfinite(values)]
    if not finite.size:
        return [None, None]
    return [float(finite.min()), float(finite.max())]


class AnalyzeCommand(PipelineCommand):
    """Sample the pointwise invariants and export the surface mesh.

    Writes ``surface.obj`` (with its ``.w.csv`` sidecar) and one CSV grid per
    invariant. Analytic charts also check the curvature-ellipse inequality
    ‖H‖² − (K − c) ≥ |K_N| at every grid point.

    _See Also_:
        [point_invariants][bonnetlab.invariants.point_invariants]
    """

    name = 'analyze'

    def run(self, session: Session) -> CommandResult:
        """Sample the invariants."""
        chart, grid, out = session.chart, session.grid, session.out_dir
        uu, vv = grid.mesh()
        jet = eval_jet(chart, uu, vv)
        inv = point_invariants(chart, uu, vv, hopf=False)
        session.artifacts.extend(write_obj(out / 'surface.obj', jet.f, grid))
        fields = {
            'K': inv.K,
            'K_N': inv.K_N,
            'normH2': inv.normH2,
            'B_minus': inv.B_minus,
            'B_plus': inv.B_plus,
            'lambda1': inv.lambda1,
            'lambda2': inv.lambda2,
        }
        for name, values in fields.items():
            session.artifacts.append(write_grid_csv(out / f'surface_{name}.csv', grid, values))

        gap = np.abs(inv.K_N) - (inv.normH2 - (inv.K - inv.ambient_c))
        violation = finite_max((np.maximum(gap, 0.0) / inv.scale ** 2).ravel())
        block: Dict[str, Any] = {
            'grids': {name: downsample(values) for name, values in fields.items()},
            'ranges': {name: _range(values) for name, values in fields.items()},
            'ellipse_inequality_violation': violation,
        }
        checks = []
        if chart.analytic:
            checks.append(CheckResult.bound('ellipse_inequality', violation, FACT_TOLERANCE))
        return block, checks


class ClassifyCommand(PipelineCommand):
    """Classify points (umbilic, pseudo-umbilic, minimal) and isotropic isothermicity.

    The ``[classify]`` table may name an ``expect`` property among
    `CLASSIFICATION_EXPECTATIONS`; it becomes a check.

    _See Also_:
        [classify_point][bonnetlab.invariants.classify_point],
        [isothermicity_classify][bonnetlab.mixedforms.isothermicity_classify]
    """

    name = 'classify'

    def run(self, session: Session) -> CommandResult:
        """Classify the grid points."""
        chart, grid, out = session.chart, session.grid, session.out_dir
        options = session.config.options(self.name)
        expect = options.get('expect')
        if expect is not None and expect not in CLASSIFICATION_EXPECTATIONS:
            raise ConfigError(f'[classify] expect must be one of {CLASSIFICATION_EXPECTATIONS}')
        inv = point_invariants(chart, *grid.mesh(), hopf=False)
        classes = classify_point(inv, session.tolerance('eps_scale', EPS_SCALE))
        iso = isothermicity_classify(chart, grid,
                                     session.tolerance('isothermic_tolerance',
                                                       ISOTHERMIC_TOLERANCE),
                                     session.threads)
        signs = {}
        for name, flags, mask, costar in (
            ('minus', iso.iso_minus, iso.mask_minus, iso.costar_minus),
            ('plus', iso.iso_plus, iso.mask_plus, iso.costar_plus),
        ):
            session.artifacts.append(write_grid_csv(
                out / f'classify_iso_{name}.csv', grid,
                np.where(mask, flags.astype(float), np.nan)))
            session.artifacts.append(write_grid_csv(out / f'classify_costar_{name}.csv', grid,
                                                    costar))
            signs[name] = {
                'iso_points': int(np.count_nonzero(flags)),
                'non_points': int(np.count_nonzero(mask & ~flags)),
                'masked_points': int(np.count_nonzero(~mask)),
                'costar_ratio_max': finite_max((np.abs(costar) / iso.threshold)[mask]),
            }
        summary = {
            'strong': iso.strong,
            'strongly_totally_non': iso.strongly_totally_non,
            'totally_non_minus': iso.totally_non_minus,
            'totally_non_plus': iso.totally_non_plus,
        }
        block = {
            'tags': {tag.value: int(np.count_nonzero(classes.tag == tag.value))
                     for tag in PointTag},
            'tag_grid': downsample(classes.tag),
            'isothermicity': signs,
            'label_grid': downsample(iso.labels()),
            'summary': summary,
            'cross_check': iso.cross_check,
        }
        checks = []
        if expect is not None:
            checks.append(CheckResult.compare(f'classification_{expect}',
                                              float(summary[expect]), 1.0, 0.0))
        return block, checks


class LinesCommand(PipelineCommand):
    """Trace principal or mean-directional curvature lines as polylines.

    _See Also_:
        [trace_lines][bonnetlab.invariants.trace_lines]
    """

    name = 'lines'

    def run(self, session: Session) -> CommandResult:
        """Trace the requested families."""
        options = session.config.options(self.name)
        family = options.get('family', 'principal')
        families = ('principal', 'mean_directional') if family == 'both' else (family,)
        seeds = options.get('seeds')
        seeds = np.asarray(seeds, dtype=float) if seeds is not None else None
        eps_scale = session.tolerance('eps_scale', EPS_SCALE)
        block: Dict[str, Any] = {}
        for name in families:
            try:
                lines = trace_lines(session.chart, session.grid, name, seeds,
                                    options.get('max_steps'), eps_scale)
            except ValueError as error:
                raise ConfigError(f'[lines] {error}') from error
            path = write_polylines(session.out_dir / f'lines_{name}.csv', lines)
            session.artifacts.append(path)
            block[name] = {
                'count': len(lines),
                'points': [len(line) for line in lines],
            }
            _logger.info('traced %d %s lines', len(lines), name)
        return block, []


class IndexCommand(PipelineCommand):
    """Indices of Ω± at the pseudo-umbilic points of the chart.

    Points come from the ``[index]`` table (``points``) or from the grid
    search. On charts covering a closed surface the index sum is checked
    against 2χ ± χ_N.

    _See Also_:
        [index][bonnetlab.mixedforms.index]
    """

    name = 'index'

    def run(self, session: Session) -> CommandResult:
        """Compute the indices per sign."""
        chart, grid = session.chart, session.grid
        options = session.config.options(self.name)
        radii = tuple(options.get('radii', INDEX_RADII))
        given = options.get('points')
        inv = point_invariants(chart, *grid.mesh(), hopf=False)
        eps_scale = session.tolerance('eps_scale', EPS_SCALE)
        block: Dict[str, Any] = {}
        checks = []
        for sign in _signs(options):
            B = inv.B_plus if sign_value(sign) > 0 else inv.B_minus
            if given is None and not np.any(B > eps_scale * inv.scale):
                block[sign] = {'skipped': f'B{sign} vanishes on the grid'}
                continue
            points: Sequence = given if given is not None else find_singular_points(
                chart, grid, sign, B, inv.scale)
            results = [index(chart, point, sign, radii) for point in points]
            total = float(sum(result.extrapolated for result in results))
            block[sign] = {'indices': results, 'sum': total}
            known = chart.euler_characteristic is not None and \
                chart.normal_euler_number is not None
            if chart.compact and known and given is None:
                target = 2 * chart.euler_characteristic + \
                    sign_value(sign) * chart.normal_euler_number
                checks.append(CheckResult.compare(f'index_sum[{sign}]', total, target,
                                                  INDEX_TOLERANCE))
        return block, checks


class GlobalChecksCommand(PipelineCommand):
    """Integral identities and pointwise structure checks for each sign.

    _See Also_:
        [global_checks][bonnetlab.mixedforms.global_checks]
    """

    name = 'global-checks'

    def run(self, session: Session) -> CommandResult:
        """Run the checks per sign."""
        options = session.config.options(self.name)
        include = options.get('include')
        block: Dict[str, Any] = {}
        checks = []
        for sign in _signs(options):
            try:
                report = global_checks(session.chart, session.grid, sign, include,
                                       session.threads)
            except ValueError as error:
                raise ConfigError(f'[global-checks] {error}') from error
            block[sign] = {'indices': report.indices, 'extras': report.extras}
            checks += [signed(check, sign) for check in report.checks]
        return block, checks


class VerifyCommand(PipelineCommand):
    """Verify the facts a catalog chart certifies.

    _See Also_:
        [verify_facts][bonnetlab.zoo.verify_facts]
    """

    name = 'verify'

    def run(self, session: Session) -> CommandResult:
        """Run the fact checks."""
        checks = list(verify_facts(session.chart, session.grid))
        return {'facts': list(session.chart.facts)}, checks
