"""Commands that construct new surfaces: Bonnet mates and infinitesimal deformations."""

import logging
import math

from typing import Any, Dict, List

import numpy as np

from bonnetlab.bonnet import SIGNS, moduli_sample
from bonnetlab.commands import CommandResult, PipelineCommand
from bonnetlab.config import (
    DEFORMATION_T_VALUES,
    IDENTITY_TOLERANCE,
    LATTICE_REFINEMENT,
    MATE_THETAS,
    MATE_TOLERANCE,
)
from bonnetlab.dataobjects import CheckResult
from bonnetlab.dataobjects.run import Session
from bonnetlab.deformations import (
    build_variation,
    integrate_bending,
    trivial_variation,
    verify_deformation,
)
from bonnetlab.exception import ConfigError
from bonnetlab.export import write_obj

_logger = logging.getLogger(__name__)


def _thetas(options: Dict[str, Any]) -> List[float]:
    if 'thetas' in options:
        return [float(t) for t in options['thetas']]
    if 'samples' in options:
        n = int(options['samples'])
        if n < 1:
            raise ConfigError('[mates] samples must be positive')
        return [2.0 * math.pi * k / n for k in range(n)]
    return list(MATE_THETAS)


def _refinement(options: Dict[str, Any], section: str) -> int:
    refinement = int(options.get('refinement', LATTICE_REFINEMENT))
    if refinement < 2 or refinement % 2:
        raise ConfigError(f'[{section}] refinement must be a positive even number')
    return refinement


class MatesCommand(PipelineCommand):
    """Sample a family of Bonnet mates and test it against the source.

    Each member must reproduce the induced metric, ‖H‖, K_N and the
    curvature ellipse of the source and carry holomorphic distortion
    differentials. Distinct members must be pairwise noncongruent, and the
    member with every θ₀ = 0 must be congruent to the source. A family that
    collapses (non-involutive θ system or vanishing isotropic part) is
    reported without checks.

    _See Also_:
        [moduli_sample][bonnetlab.bonnet.moduli_sample]
    """

    name = 'mates'

    def run(self, session: Session) -> CommandResult:
        """Sample the family."""
        options = session.config.options(self.name)
        sign = options.get('sign', '-')
        if sign not in SIGNS:
            raise ConfigError(f'[mates] sign must be one of {SIGNS}, got {sign!r}')
        family = moduli_sample(session.chart, session.grid, sign, _thetas(options),
                               _refinement(options, self.name), session.threads)
        block: Dict[str, Any] = {'sign': sign, 'collapsed': family.collapsed}
        if family.collapsed:
            block['reason'] = family.reason
            return block, []

        mate_tolerance = session.tolerance('mate_tolerance', MATE_TOLERANCE)
        checks = []
        for k, sample in enumerate(family.samples):
            checks += [
                CheckResult.bound(f'mate_metric[{k}]', sample.metric_error, mate_tolerance),
                CheckResult.bound(f'mate_mean_curvature[{k}]', sample.mean_curvature_error,
                                  mate_tolerance),
                CheckResult.bound(f'mate_normal_curvature[{k}]', sample.normal_curvature_error,
                                  mate_tolerance),
                CheckResult.bound(f'mate_ellipse[{k}]', sample.ellipse_error, mate_tolerance),
                CheckResult.bound(f'distortion_holomorphy[{k}]', sample.distortion_holomorphy,
                                  mate_tolerance),
            ]
        n = len(family.samples)
        distinct = [(i, j) for i in range(n) for j in range(i + 1, n)
                    if any(family.samples[i].theta0[s] != family.samples[j].theta0[s]
                           for s in family.samples[i].theta0)]
        congruent = sum(1 for i, j in distinct if not family.pairwise_noncongruent[i, j])
        checks.append(CheckResult.bound('congruent_pairs', float(congruent), 0.0))
        for k, sample in enumerate(family.samples):
            if all(value == 0.0 for value in sample.theta0.values()):
                relative = sample.congruence.residual / sample.congruence.diameter
                checks.append(CheckResult.bound(f'identity_residual[{k}]', relative,
                                                session.tolerance('identity_tolerance',
                                                                  IDENTITY_TOLERANCE)))
        block.update({
            'samples': family.samples,
            'pairwise_residual': family.pairwise_residual,
            'pairwise_noncongruent': family.pairwise_noncongruent,
            'all_noncongruent': family.all_noncongruent,
        })
        return block, checks


class DeformCommand(PipelineCommand):
    """Build an infinitesimal isometric deformation and run its order tests.

    The ``[deform]`` table selects ``kind`` (``isotropic``,
    ``mean_curvature`` or ``trivial``), the preserved ``sign``, the
    ``t_values`` and, for the trivial family, the rotation speed ``u``.
    Writes one mesh ``deform_<k>.obj`` per t value.

    _See Also_:
        [build_variation][bonnetlab.deformations.build_variation],
        [verify_deformation][bonnetlab.deformations.verify_deformation]
    """

    name = 'deform'

    def run(self, session: Session) -> CommandResult:
        """Build, integrate and verify the deformation."""
        chart, grid = session.chart, session.grid
        options = session.config.options(self.name)
        kind = options.get('kind', 'isotropic')
        sign = options.get('sign', '-')
        if sign not in ('-', '+'):
            raise ConfigError(f'[deform] sign must be "-" or "+", got {sign!r}')
        refinement = _refinement(options, self.name)
        t_values = tuple(float(t) for t in options.get('t_values', DEFORMATION_T_VALUES))
        if kind == 'trivial':
            forms = trivial_variation(chart, grid, float(options.get('u', 1.0)), sign,
                                      refinement, session.threads)
        elif kind in ('isotropic', 'mean_curvature'):
            forms = build_variation(chart, grid, sign, kind, refinement, session.threads)
        else:
            raise ConfigError(f'[deform] unknown kind {kind!r}')
        bending = integrate_bending(chart, forms)
        try:
            report = verify_deformation(chart, bending, t_values, session.threads,
                                        superconformal=kind == 'mean_curvature')
        except ValueError as error:
            raise ConfigError(f'[deform] {error}') from error

        meshes = {}
        for k, (t, positions) in enumerate(sorted(report.surfaces.items(), reverse=True)):
            obj, sidecar = write_obj(session.out_dir / f'deform_{k}.obj', positions, grid)
            session.artifacts += [obj, sidecar]
            meshes[obj.name] = t
        block = {
            'kind': report.kind,
            'sign': report.sign,
            'samples': report.samples,
            'residuals': forms.residuals,
            'closure_residual': bending.closure_residual,
            'nontriviality_residual': bending.nontriviality_residual,
            'bending_residual': bending.bending_residual,
            'bending_field': np.linalg.norm(bending.T, axis=-1).max(),
            'meshes': meshes,
        }
        return block, list(report.checks)
