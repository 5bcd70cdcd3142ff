"""
Scan Recurrences and Their Materialized Matrices

Every mixer core is a linear map of its value stream once the step
coefficients are fixed: y = M v. This module holds both views:

- Sequential scans, one per mixer kind, written step by step exactly as the
  recurrences read. They are dtype-agnostic; float64 inputs give the
  reference path.
- materialize_mixer_matrix(), which builds M per channel (MAMBA) or per head.
  For MAMBA2 and HYDRA the materialized form is also the production path,
  since a scalar decay per head makes M cheap to build for whole utterances.

Recurrences (h0 = 0, S0 = 0):

  MAMBA   h_t = exp(delta_t A) h_{t-1} + delta_t B_t v_t ; y_t = <C_t, h_t> + d v_t
  MAMBA2  S_t = a_t S_{t-1} + v_t k_t^T                  ; y_t = S_t q_t + d v_t
  HYDRA   y_t = F_{t-1} q_t + R_{t+1} q_t + diag_t v_t
          F_t = a_t F_{t-1} + v_t k_t^T   (forward)
          R_t = a_t R_{t+1} + v_t k_t^T   (reversed)
  GDN     S_t = S_{t-1} alpha_t (I - beta_t k_t k_t^T) + beta_t v_t k_t^T ; y_t = S_t q_t
"""

import torch
import torch.nn.functional as F

from ..errors import ConfigError, ShapeError
from ..util.checks import check_finite
from .config import MixerKind, validate_coefficients


def _prepare(v, coeffs, kind):
    if MixerKind.parse(coeffs.kind) != kind:
        raise ConfigError(f"expected {kind} coefficients, got {coeffs.kind}")
    if v is None:
        v = coeffs.value
    check_finite(v, "value stream")
    validate_coefficients(coeffs, v)
    return v


def selective_scan_ref(v, coeffs):
    """
    Per-channel selective scan (MAMBA).

    Args:
        v: value stream (B, T, C), or None to use coeffs.value
        coeffs: MAMBA StepCoefficients

    Returns:
        Tensor: y with the shape of v
    """
    v = _prepare(v, coeffs, MixerKind.MAMBA)
    delta, A, Bm, Cm, d = coeffs.delta, coeffs.A, coeffs.B, coeffs.C, coeffs.skip

    batch, length, channels = v.shape
    h = v.new_zeros(batch, channels, A.shape[-1])
    ys = []
    for t in range(length):
        dt = delta[:, t, :, None]                       # (B, C, 1)
        h = torch.exp(dt * A) * h + dt * Bm[:, t, None, :] * v[:, t, :, None]
        ys.append((h * Cm[:, t, None, :]).sum(-1) + d * v[:, t])
    return torch.stack(ys, dim=1)


def ssd_scan_ref(v, coeffs):
    """
    Scalar-decay headed scan (MAMBA2).

    Args:
        v: value stream (B, T, H, P), or None to use coeffs.value
        coeffs: MAMBA2 StepCoefficients

    Returns:
        Tensor: y with the shape of v
    """
    v = _prepare(v, coeffs, MixerKind.MAMBA2)
    a, k, q, d = coeffs.decay_values(), coeffs.key, coeffs.query, coeffs.skip

    batch, length, heads, pdim = v.shape
    state = v.new_zeros(batch, heads, pdim, k.shape[-1])
    ys = []
    for t in range(length):
        state = a[:, t, :, None, None] * state + v[:, t, :, :, None] * k[:, t, :, None, :]
        y = (state * q[:, t, :, None, :]).sum(-1) + d[None, :, None] * v[:, t]
        ys.append(y)
    return torch.stack(ys, dim=1)


def quasiseparable_scan_ref(v, coeffs):
    """
    Bidirectional quasiseparable scan (HYDRA).

    The forward state seen at frame t excludes frame t, as does the reversed
    state; frame t itself only enters through the diagonal term.

    Args:
        v: value stream (B, T, H, P), or None to use coeffs.value
        coeffs: HYDRA StepCoefficients

    Returns:
        Tensor: y with the shape of v
    """
    v = _prepare(v, coeffs, MixerKind.HYDRA)
    a, k, q, diag = coeffs.decay_values(), coeffs.key, coeffs.query, coeffs.diag

    batch, length, heads, pdim = v.shape
    sdim = k.shape[-1]

    fwd = [None] * length
    state = v.new_zeros(batch, heads, pdim, sdim)
    for t in range(length):
        fwd[t] = (state * q[:, t, :, None, :]).sum(-1)
        state = a[:, t, :, None, None] * state + v[:, t, :, :, None] * k[:, t, :, None, :]

    bwd = [None] * length
    state = v.new_zeros(batch, heads, pdim, sdim)
    for t in reversed(range(length)):
        bwd[t] = (state * q[:, t, :, None, :]).sum(-1)
        state = a[:, t, :, None, None] * state + v[:, t, :, :, None] * k[:, t, :, None, :]

    return torch.stack(fwd, dim=1) + torch.stack(bwd, dim=1) + diag[..., None] * v


def delta_rule_scan_ref(v, coeffs):
    """
    Gated delta rule scan (GDN).

    Args:
        v: value stream (B, T, H, P), or None to use coeffs.value
        coeffs: GDN StepCoefficients (keys already unit norm)

    Returns:
        Tensor: y with the shape of v
    """
    v = _prepare(v, coeffs, MixerKind.GDN)
    alpha, beta, k, q = coeffs.decay_values(), coeffs.beta, coeffs.key, coeffs.query

    batch, length, heads, pdim = v.shape
    state = v.new_zeros(batch, heads, pdim, k.shape[-1])
    ys = []
    for t in range(length):
        kt = k[:, t, :, None, :]                        # (B, H, 1, S)
        bt = beta[:, t, :, None, None]
        sk = (state * kt).sum(-1, keepdim=True)         # S_{t-1} k_t
        state = alpha[:, t, :, None, None] * (state - bt * sk * kt) + bt * v[:, t, :, :, None] * kt
        ys.append((state * q[:, t, :, None, :]).sum(-1))
    return torch.stack(ys, dim=1)


SCANS = {
    MixerKind.MAMBA: selective_scan_ref,
    MixerKind.MAMBA2: ssd_scan_ref,
    MixerKind.HYDRA: quasiseparable_scan_ref,
    MixerKind.GDN: delta_rule_scan_ref,
}


def run_scan(coeffs, v=None):
    """Sequential scan for any kind"""
    return SCANS[MixerKind.parse(coeffs.kind)](v, coeffs)


def segsum(x):
    """
    Stable segment sums along the last axis.

    Args:
        x: (..., T)

    Returns:
        Tensor: (..., T, T) with out[i, j] = sum(x[j+1..i]) for j <= i and
        -inf above the diagonal
    """
    length = x.size(-1)
    x = x[..., None].expand(*x.shape, length)
    strict = torch.tril(torch.ones(length, length, dtype=torch.bool, device=x.device), diagonal=-1)
    x = x.masked_fill(~strict, 0)
    sums = torch.cumsum(x, dim=-2)
    lower = torch.tril(torch.ones(length, length, dtype=torch.bool, device=x.device), diagonal=0)
    return sums.masked_fill(~lower, -torch.inf)


def _decay_matrix(log_decay):
    """exp(segsum(log a)) per head: (B, T, H) -> (B, H, T, T), zero above the diagonal"""
    return torch.exp(segsum(log_decay.transpose(1, 2)))


def _materialize_mamba(coeffs, length):
    delta = coeffs.delta.transpose(1, 2)                # (B, C, T)
    seg = segsum(delta)
    lower = torch.tril(torch.ones(length, length, dtype=torch.bool, device=delta.device))
    seg = seg.masked_fill(~lower, 0.0)
    # transition from s to t for every state entry: exp(A * sum(delta[s+1..t]))
    trans = torch.exp(seg[..., None] * coeffs.A[None, :, None, None, :])     # (B, C, T, T, S)
    m = torch.einsum('btn,bsn,bctsn->bcts', coeffs.C, coeffs.B, trans)
    m = m * delta[:, :, None, :] * lower
    return m + torch.diag_embed(coeffs.skip[None, :, None].expand_as(delta))


def _materialize_mamba2(coeffs, length):
    qk = torch.einsum('bthn,bshn->bhts', coeffs.query, coeffs.key)
    m = qk * _decay_matrix(coeffs.decay_logs())
    skip = coeffs.skip[None, :, None].expand(m.shape[0], -1, length)
    return m + torch.diag_embed(skip)


def _materialize_hydra(coeffs, length):
    qk = torch.einsum('bthn,bshn->bhts', coeffs.query, coeffs.key)
    g = _decay_matrix(coeffs.decay_logs())
    # shifted[t, s] = g[t-1, s]: products over r in (s, t), strictly lower
    shifted = F.pad(g[..., :-1, :], (0, 0, 1, 0))
    m = qk * (shifted + shifted.transpose(-1, -2))
    return m + torch.diag_embed(coeffs.diag.transpose(1, 2))


def _materialize_gdn(coeffs, length):
    alpha, beta, k, q = coeffs.decay_values(), coeffs.beta, coeffs.key, coeffs.query
    batch, _, heads, _ = k.shape
    m = k.new_zeros(batch, heads, length, length)
    for s in range(length):
        # row vector beta_s k_s^T carried forward through each transition
        u = beta[:, s, :, None] * k[:, s]               # (B, H, S)
        for t in range(s, length):
            if t > s:
                uk = (u * k[:, t]).sum(-1, keepdim=True)
                u = alpha[:, t, :, None] * (u - beta[:, t, :, None] * uk * k[:, t])
            m[:, :, t, s] = (u * q[:, t]).sum(-1)
    return m


MATERIALIZERS = {
    MixerKind.MAMBA: _materialize_mamba,
    MixerKind.MAMBA2: _materialize_mamba2,
    MixerKind.HYDRA: _materialize_hydra,
    MixerKind.GDN: _materialize_gdn,
}


def materialize_mixer_matrix(coeffs, kind, length):
    """
    Build the mixer matrix M with y = M v for frozen coefficients.

    Args:
        coeffs: StepCoefficients (treated as constants)
        kind: MixerKind value; must match coeffs.kind
        length: T, must match the coefficients

    Returns:
        Tensor: (B, C, T, T) for MAMBA (one matrix per channel),
        (B, H, T, T) for headed kinds
    """
    kind = MixerKind.parse(kind)
    if MixerKind.parse(coeffs.kind) != kind:
        raise ConfigError(f"coefficients are {coeffs.kind}, asked to materialize {kind}")
    validate_coefficients(coeffs)
    if coeffs.length != length:
        raise ShapeError(f"coefficients cover {coeffs.length} frames, asked for T={length}")
    return MATERIALIZERS[kind](coeffs, length)


def apply_mixer_matrix(m, v, kind):
    """
    Multiply a materialized mixer matrix into a value stream.

    Args:
        m: matrix from materialize_mixer_matrix
        v: (B, T, C) for MAMBA, (B, T, H, P) otherwise
        kind: MixerKind value

    Returns:
        Tensor: y with the shape of v
    """
    if MixerKind.parse(kind) == MixerKind.MAMBA:
        return torch.einsum('bcts,bsc->btc', m, v)
    return torch.einsum('bhts,bshp->bthp', m, v)


def mixer_core(coeffs):
    """
    Production core for a mixer: y for coeffs.value.

    MAMBA and GDN run their sequential scans; MAMBA2 and HYDRA apply the
    materialized matrix.
    """
    kind = MixerKind.parse(coeffs.kind)
    if kind in (MixerKind.MAMBA2, MixerKind.HYDRA):
        m = materialize_mixer_matrix(coeffs, kind, coeffs.length)
        return apply_mixer_matrix(m, coeffs.value, kind)
    return run_scan(coeffs)
