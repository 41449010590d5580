# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: encoder, decoder step and the fused training pass.

Same math as the pure path (mthd.seq2seq.graph / runtime.PyBackend), hand
written as C loops over contiguous float64 buffers. Agreement between the
two backends is covered by tests; gradients additionally against finite
differences.
"""

import numpy as np

from libc.math cimport exp, log, tanh
from libc.string cimport memset

# keep in sync with mthd.seq2seq.graph.ATTENTION_PRIOR_SIGMA
DEF LOCATION_SIGMA = 4.0


cdef inline double _sigmoid(double x) noexcept:
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    cdef double e = exp(x)
    return e / (1.0 + e)


cdef inline void _vm(const double* x, const double* m, double* y, Py_ssize_t k, Py_ssize_t n) noexcept:
    """y += x @ M for row-major M (k x n)."""
    cdef Py_ssize_t i, j
    cdef double xi
    cdef const double* row
    for i in range(k):
        xi = x[i]
        if xi == 0.0:
            continue
        row = m + i * n
        for j in range(n):
            y[j] += xi * row[j]


cdef inline void _vmt(const double* g, const double* m, double* y, Py_ssize_t k, Py_ssize_t n) noexcept:
    """y += g @ M^T for row-major M (k x n); g has length n, y length k."""
    cdef Py_ssize_t i, j
    cdef double acc
    cdef const double* row
    for i in range(k):
        row = m + i * n
        acc = 0.0
        for j in range(n):
            acc += g[j] * row[j]
        y[i] += acc


cdef inline void _outer(const double* x, const double* g, double* big, Py_ssize_t k, Py_ssize_t n) noexcept:
    """big[i, j] += x[i] * g[j] for row-major big (k x n)."""
    cdef Py_ssize_t i, j
    cdef double xi
    cdef double* row
    for i in range(k):
        xi = x[i]
        if xi == 0.0:
            continue
        row = big + i * n
        for j in range(n):
            row[j] += xi * g[j]


cdef inline void _acc(double* y, const double* x, Py_ssize_t n) noexcept:
    cdef Py_ssize_t i
    for i in range(n):
        y[i] += x[i]


cdef inline void _gru_fwd(
    const double* gi, const double* gh, const double* hprev,
    double* z, double* r, double* n, double* ghn, double* hout,
    Py_ssize_t h,
) noexcept:
    """z/r/n gates from packed pre-activations; caches for backward."""
    cdef Py_ssize_t i
    cdef double zi, ni
    for i in range(h):
        z[i] = _sigmoid(gi[i] + gh[i])
        r[i] = _sigmoid(gi[h + i] + gh[h + i])
        ghn[i] = gh[2 * h + i]
        n[i] = tanh(gi[2 * h + i] + r[i] * ghn[i])
        hout[i] = (1.0 - z[i]) * n[i] + z[i] * hprev[i]


cdef inline void _gru_bwd(
    const double* ds, const double* z, const double* r, const double* n,
    const double* ghn, const double* hprev,
    double* dgi, double* dgh, double* dhprev,
    Py_ssize_t h,
) noexcept:
    """Given d(loss)/d(hout), fill packed dgi/dgh and add the hprev term.

    dhprev accumulates only the direct z*ds path; the dgh @ w_h^T part is
    the caller's job (it owns the weight matrix).
    """
    cdef Py_ssize_t i
    cdef double dn, dz, dpre_n, dr, dpre_z, dpre_r
    for i in range(h):
        dn = ds[i] * (1.0 - z[i])
        dz = ds[i] * (hprev[i] - n[i])
        dhprev[i] += ds[i] * z[i]
        dpre_n = dn * (1.0 - n[i] * n[i])
        dr = dpre_n * ghn[i]
        dpre_z = dz * z[i] * (1.0 - z[i])
        dpre_r = dr * r[i] * (1.0 - r[i])
        dgi[i] = dpre_z
        dgi[h + i] = dpre_r
        dgi[2 * h + i] = dpre_n
        dgh[i] = dpre_z
        dgh[h + i] = dpre_r
        dgh[2 * h + i] = dpre_n * r[i]


cdef class Core:
    """Kernel bundle over live views of one model's parameter arrays."""

    cdef double[:, ::1] src_embed, tgt_embed
    cdef double[:, ::1] wf_x, wf_h, wb_x, wb_h, wd_x, wd_h
    cdef double[::1] bf_x, bf_h, bb_x, bb_h, bd_x, bd_h
    cdef double[:, ::1] att_ws, att_wa, init_w, out_w
    cdef double[::1] att_b, att_v, init_b, out_b
    cdef Py_ssize_t d, h, a, vt

    def __init__(self, weights, Py_ssize_t embed_dim, Py_ssize_t hidden_dim, Py_ssize_t vocab_tgt):
        self.src_embed = weights["src_embed"]
        self.tgt_embed = weights["tgt_embed"]
        self.wf_x = weights["enc_fwd.w_x"]
        self.wf_h = weights["enc_fwd.w_h"]
        self.bf_x = weights["enc_fwd.b_x"]
        self.bf_h = weights["enc_fwd.b_h"]
        self.wb_x = weights["enc_bwd.w_x"]
        self.wb_h = weights["enc_bwd.w_h"]
        self.bb_x = weights["enc_bwd.b_x"]
        self.bb_h = weights["enc_bwd.b_h"]
        self.wd_x = weights["dec.w_x"]
        self.wd_h = weights["dec.w_h"]
        self.bd_x = weights["dec.b_x"]
        self.bd_h = weights["dec.b_h"]
        self.att_ws = weights["att.w_state"]
        self.att_wa = weights["att.w_ann"]
        self.att_b = weights["att.bias"]
        self.att_v = weights["att.v"]
        self.init_w = weights["init.w"]
        self.init_b = weights["init.b"]
        self.out_w = weights["out.w"]
        self.out_b = weights["out.b"]
        self.d = embed_dim
        self.h = hidden_dim
        self.a = hidden_dim
        self.vt = vocab_tgt

    cdef void _encode_dir(
        self, const long long* src, Py_ssize_t t_len, bint backward_dir,
        double* hs, double* z, double* r, double* n, double* ghn,
    ) noexcept:
        """One encoder direction; fills hs/z/r/n/ghn as (t_len x h) blocks."""
        cdef Py_ssize_t h = self.h
        cdef const double* w_x
        cdef const double* w_h
        cdef const double* b_x
        cdef const double* b_h
        if backward_dir:
            w_x = &self.wb_x[0, 0]
            w_h = &self.wb_h[0, 0]
            b_x = &self.bb_x[0]
            b_h = &self.bb_h[0]
        else:
            w_x = &self.wf_x[0, 0]
            w_h = &self.wf_h[0, 0]
            b_x = &self.bf_x[0]
            b_h = &self.bf_h[0]
        cdef const double* emb = &self.src_embed[0, 0]
        cdef Py_ssize_t d = self.d
        cdef Py_ssize_t step, t, i
        gi_buf = np.empty(3 * h)
        gh_buf = np.empty(3 * h)
        zero = np.zeros(h)
        cdef double[::1] gi_mv = gi_buf, gh_mv = gh_buf, zero_mv = zero
        cdef double* gi = &gi_mv[0]
        cdef double* gh = &gh_mv[0]
        cdef const double* hprev = &zero_mv[0]
        for step in range(t_len):
            t = t_len - 1 - step if backward_dir else step
            for i in range(3 * h):
                gi[i] = b_x[i]
                gh[i] = b_h[i]
            _vm(emb + src[t] * d, w_x, gi, d, 3 * h)
            _vm(hprev, w_h, gh, h, 3 * h)
            _gru_fwd(gi, gh, hprev, z + t * h, r + t * h, n + t * h,
                     ghn + t * h, hs + t * h, h)
            hprev = hs + t * h

    def encode(self, long long[::1] src):
        """annotations (T x 2h), ann_proj (T x a), initial state (h,)."""
        cdef Py_ssize_t t_len = src.shape[0]
        cdef Py_ssize_t h = self.h, a = self.a, d2 = 2 * self.h
        cdef Py_ssize_t t, i, j

        hs_f = np.empty((t_len, h))
        hs_b = np.empty((t_len, h))
        cache = np.empty((4, t_len, h))  # scratch; inference discards it
        cdef double[:, ::1] hf = hs_f, hb = hs_b
        cdef double[:, :, ::1] ck = cache
        self._encode_dir(&src[0], t_len, False, &hf[0, 0], &ck[0, 0, 0],
                         &ck[1, 0, 0], &ck[2, 0, 0], &ck[3, 0, 0])
        self._encode_dir(&src[0], t_len, True, &hb[0, 0], &ck[0, 0, 0],
                         &ck[1, 0, 0], &ck[2, 0, 0], &ck[3, 0, 0])

        ann = np.empty((t_len, d2))
        ann_proj = np.empty((t_len, a))
        state0 = np.zeros(h)
        mean = np.zeros(d2)
        cdef double[:, ::1] ann_mv = ann, proj_mv = ann_proj
        cdef double[::1] s0_mv = state0, mean_mv = mean
        for t in range(t_len):
            for i in range(h):
                ann_mv[t, i] = hf[t, i]
                ann_mv[t, h + i] = hb[t, i]
            for i in range(d2):
                mean_mv[i] += ann_mv[t, i]
            for j in range(a):
                proj_mv[t, j] = self.att_b[j]
            _vm(&ann_mv[t, 0], &self.att_wa[0, 0], &proj_mv[t, 0], d2, a)
        for i in range(d2):
            mean_mv[i] /= t_len
        _vm(&mean_mv[0], &self.init_w[0, 0], &s0_mv[0], d2, h)
        for i in range(h):
            state0[i] = tanh(state0[i] + self.init_b[i])
        return ann, ann_proj, state0

    def step(self, double[:, ::1] ann, double[:, ::1] ann_proj,
             double[::1] state, Py_ssize_t prev_id, Py_ssize_t step_index=0):
        """One decode step: (new state (h,), log-prob vector (V,))."""
        cdef Py_ssize_t t_len = ann.shape[0]
        cdef Py_ssize_t h = self.h, a = self.a, d = self.d, vt = self.vt
        cdef Py_ssize_t d2 = 2 * h, din = d + d2
        cdef Py_ssize_t t, i, j

        q_arr = np.zeros(a)
        alphas = np.empty(t_len)
        x_arr = np.empty(din)
        gi_arr = np.empty(3 * h)
        gh_arr = np.empty(3 * h)
        cache = np.empty((4, h))
        new_state = np.empty(h)
        logprobs = np.empty(vt)
        cdef double[::1] q = q_arr, al = alphas, x = x_arr
        cdef double[::1] gi = gi_arr, gh = gh_arr
        cdef double[:, ::1] ck = cache
        cdef double[::1] ns = new_state, lp = logprobs

        _vm(&state[0], &self.att_ws[0, 0], &q[0], h, a)
        cdef double u, score, m, s, off
        cdef double inv_sigma = 1.0 / LOCATION_SIGMA
        m = -1e300
        for t in range(t_len):
            score = 0.0
            for j in range(a):
                u = tanh(ann_proj[t, j] + q[j])
                score += self.att_v[j] * u
            off = (t - (step_index + 1.0)) * inv_sigma
            score -= off * off
            al[t] = score
            if score > m:
                m = score
        s = 0.0
        for t in range(t_len):
            al[t] = exp(al[t] - m)
            s += al[t]
        for i in range(d):
            x[i] = self.tgt_embed[prev_id, i]
        for i in range(d2):
            x[d + i] = 0.0
        for t in range(t_len):
            u = al[t] / s
            al[t] = u
            for i in range(d2):
                x[d + i] += u * ann[t, i]

        for i in range(3 * h):
            gi[i] = self.bd_x[i]
            gh[i] = self.bd_h[i]
        _vm(&x[0], &self.wd_x[0, 0], &gi[0], din, 3 * h)
        _vm(&state[0], &self.wd_h[0, 0], &gh[0], h, 3 * h)
        _gru_fwd(&gi[0], &gh[0], &state[0], &ck[0, 0], &ck[1, 0], &ck[2, 0],
                 &ck[3, 0], &ns[0], h)

        for j in range(vt):
            lp[j] = self.out_b[j]
        _vm(&ns[0], &self.out_w[0, 0], &lp[0], h, vt)
        m = lp[0]
        for j in range(1, vt):
            if lp[j] > m:
                m = lp[j]
        s = 0.0
        for j in range(vt):
            s += exp(lp[j] - m)
        s = m + log(s)
        for j in range(vt):
            lp[j] -= s
        return new_state, logprobs

    def loss_grads(self, long long[::1] src, long long[::1] tgt, grads):
        """Fused forward+backward on one pair; accumulates into grads
        (a dict of arrays matching the parameter manifest); returns loss."""
        cdef Py_ssize_t ts = src.shape[0], tt = tgt.shape[0]
        cdef Py_ssize_t h = self.h, a = self.a, d = self.d, vt = self.vt
        cdef Py_ssize_t d2 = 2 * h, din = d + d2
        cdef Py_ssize_t t, i, j, k, pos

        # ---- gradient views -------------------------------------------------
        cdef double[:, ::1] g_src_emb = grads["src_embed"]
        cdef double[:, ::1] g_tgt_emb = grads["tgt_embed"]
        cdef double[:, ::1] g_wf_x = grads["enc_fwd.w_x"]
        cdef double[:, ::1] g_wf_h = grads["enc_fwd.w_h"]
        cdef double[::1] g_bf_x = grads["enc_fwd.b_x"]
        cdef double[::1] g_bf_h = grads["enc_fwd.b_h"]
        cdef double[:, ::1] g_wb_x = grads["enc_bwd.w_x"]
        cdef double[:, ::1] g_wb_h = grads["enc_bwd.w_h"]
        cdef double[::1] g_bb_x = grads["enc_bwd.b_x"]
        cdef double[::1] g_bb_h = grads["enc_bwd.b_h"]
        cdef double[:, ::1] g_wd_x = grads["dec.w_x"]
        cdef double[:, ::1] g_wd_h = grads["dec.w_h"]
        cdef double[::1] g_bd_x = grads["dec.b_x"]
        cdef double[::1] g_bd_h = grads["dec.b_h"]
        cdef double[:, ::1] g_att_ws = grads["att.w_state"]
        cdef double[:, ::1] g_att_wa = grads["att.w_ann"]
        cdef double[::1] g_att_b = grads["att.bias"]
        cdef double[::1] g_att_v = grads["att.v"]
        cdef double[:, ::1] g_init_w = grads["init.w"]
        cdef double[::1] g_init_b = grads["init.b"]
        cdef double[:, ::1] g_out_w = grads["out.w"]
        cdef double[::1] g_out_b = grads["out.b"]

        # ---- forward: encoder ----------------------------------------------
        enc_hs = np.empty((2, ts, h))
        enc_ck = np.empty((2, 4, ts, h))  # z, r, n, ghn per direction
        cdef double[:, :, ::1] hs = enc_hs
        cdef double[:, :, :, ::1] eck = enc_ck
        self._encode_dir(&src[0], ts, False, &hs[0, 0, 0], &eck[0, 0, 0, 0],
                         &eck[0, 1, 0, 0], &eck[0, 2, 0, 0], &eck[0, 3, 0, 0])
        self._encode_dir(&src[0], ts, True, &hs[1, 0, 0], &eck[1, 0, 0, 0],
                         &eck[1, 1, 0, 0], &eck[1, 2, 0, 0], &eck[1, 3, 0, 0])

        ann = np.empty((ts, d2))
        ann_proj = np.empty((ts, a))
        mean = np.zeros(d2)
        s0 = np.zeros(h)
        cdef double[:, ::1] ann_mv = ann, proj_mv = ann_proj
        cdef double[::1] mean_mv = mean, s0_mv = s0
        for t in range(ts):
            for i in range(h):
                ann_mv[t, i] = hs[0, t, i]
                ann_mv[t, h + i] = hs[1, t, i]
            for i in range(d2):
                mean_mv[i] += ann_mv[t, i]
            for j in range(a):
                proj_mv[t, j] = self.att_b[j]
            _vm(&ann_mv[t, 0], &self.att_wa[0, 0], &proj_mv[t, 0], d2, a)
        for i in range(d2):
            mean_mv[i] /= ts
        _vm(&mean_mv[0], &self.init_w[0, 0], &s0_mv[0], d2, h)
        for i in range(h):
            s0_mv[i] = tanh(s0_mv[i] + self.init_b[i])

        # ---- forward: decoder (teacher forced) ------------------------------
        cdef Py_ssize_t steps = tt - 1
        dec_states = np.empty((steps + 1, h))  # [0] = s0
        dec_ck = np.empty((4, steps, h))
        xs = np.empty((steps, din))
        alphas = np.empty((steps, ts))
        us = np.empty((steps, ts, a))
        probs = np.empty((steps, vt))
        qs = np.empty((steps, a))
        cdef double[:, ::1] S = dec_states, X = xs, AL = alphas, P = probs, Q = qs
        cdef double[:, :, ::1] dck = dec_ck, U = us
        gi_b = np.empty(3 * h)
        gh_b = np.empty(3 * h)
        cdef double[::1] gi_mv = gi_b, gh_mv = gh_b
        cdef double* gi = &gi_mv[0]
        cdef double* gh = &gh_mv[0]
        for i in range(h):
            S[0, i] = s0_mv[i]

        cdef double loss = 0.0
        cdef double m, ssum, u, sc, off
        cdef double inv_sigma = 1.0 / LOCATION_SIGMA
        cdef long long prev, want
        for pos in range(steps):
            prev = tgt[pos]
            want = tgt[pos + 1]
            for j in range(a):
                Q[pos, j] = 0.0
            _vm(&S[pos, 0], &self.att_ws[0, 0], &Q[pos, 0], h, a)
            m = -1e300
            for t in range(ts):
                sc = 0.0
                for j in range(a):
                    u = tanh(proj_mv[t, j] + Q[pos, j])
                    U[pos, t, j] = u
                    sc += self.att_v[j] * u
                off = (t - (pos + 1.0)) * inv_sigma
                sc -= off * off
                AL[pos, t] = sc
                if sc > m:
                    m = sc
            ssum = 0.0
            for t in range(ts):
                AL[pos, t] = exp(AL[pos, t] - m)
                ssum += AL[pos, t]
            for i in range(d):
                X[pos, i] = self.tgt_embed[prev, i]
            for i in range(d2):
                X[pos, d + i] = 0.0
            for t in range(ts):
                AL[pos, t] /= ssum
                for i in range(d2):
                    X[pos, d + i] += AL[pos, t] * ann_mv[t, i]

            for i in range(3 * h):
                gi[i] = self.bd_x[i]
                gh[i] = self.bd_h[i]
            _vm(&X[pos, 0], &self.wd_x[0, 0], gi, din, 3 * h)
            _vm(&S[pos, 0], &self.wd_h[0, 0], gh, h, 3 * h)
            _gru_fwd(gi, gh, &S[pos, 0], &dck[0, pos, 0], &dck[1, pos, 0],
                     &dck[2, pos, 0], &dck[3, pos, 0], &S[pos + 1, 0], h)

            for j in range(vt):
                P[pos, j] = self.out_b[j]
            _vm(&S[pos + 1, 0], &self.out_w[0, 0], &P[pos, 0], h, vt)
            m = P[pos, 0]
            for j in range(1, vt):
                if P[pos, j] > m:
                    m = P[pos, j]
            ssum = 0.0
            for j in range(vt):
                P[pos, j] = exp(P[pos, j] - m)
                ssum += P[pos, j]
            for j in range(vt):
                P[pos, j] /= ssum
            loss += -log(P[pos, want])

        # ---- backward: decoder ----------------------------------------------
        d_state = np.zeros(h)
        d_logits = np.empty(vt)
        d_gi = np.empty(3 * h)
        d_gh = np.empty(3 * h)
        d_x = np.empty(din)
        d_state_prev = np.empty(h)
        d_alpha = np.empty(ts)
        d_e = np.empty(ts)
        d_q = np.empty(a)
        d_pre = np.empty(a)
        d_ann = np.zeros((ts, d2))
        d_proj = np.zeros((ts, a))
        cdef double[::1] dS = d_state, dL = d_logits, dGI = d_gi, dGH = d_gh
        cdef double[::1] dX = d_x, dSP = d_state_prev, dAl = d_alpha, dE = d_e
        cdef double[::1] dQ = d_q, dPre = d_pre
        cdef double[:, ::1] dAnn = d_ann, dProj = d_proj
        cdef double dots, acc

        for pos in range(steps - 1, -1, -1):
            prev = tgt[pos]
            want = tgt[pos + 1]
            # cross entropy + out projection
            for j in range(vt):
                dL[j] = P[pos, j]
            dL[want] -= 1.0
            _outer(&S[pos + 1, 0], &dL[0], &g_out_w[0, 0], h, vt)
            _acc(&g_out_b[0], &dL[0], vt)
            _vmt(&dL[0], &self.out_w[0, 0], &dS[0], h, vt)

            # GRU cell
            for i in range(h):
                dSP[i] = 0.0
            _gru_bwd(&dS[0], &dck[0, pos, 0], &dck[1, pos, 0], &dck[2, pos, 0],
                     &dck[3, pos, 0], &S[pos, 0], &dGI[0], &dGH[0], &dSP[0], h)
            _outer(&X[pos, 0], &dGI[0], &g_wd_x[0, 0], din, 3 * h)
            _acc(&g_bd_x[0], &dGI[0], 3 * h)
            _outer(&S[pos, 0], &dGH[0], &g_wd_h[0, 0], h, 3 * h)
            _acc(&g_bd_h[0], &dGH[0], 3 * h)
            for i in range(din):
                dX[i] = 0.0
            _vmt(&dGI[0], &self.wd_x[0, 0], &dX[0], din, 3 * h)
            _vmt(&dGH[0], &self.wd_h[0, 0], &dSP[0], h, 3 * h)

            # embedding part of x
            for i in range(d):
                g_tgt_emb[prev, i] += dX[i]

            # attention: context part of x
            dots = 0.0
            for t in range(ts):
                acc = 0.0
                for i in range(d2):
                    acc += dX[d + i] * ann_mv[t, i]
                    dAnn[t, i] += AL[pos, t] * dX[d + i]
                dAl[t] = acc
                dots += AL[pos, t] * acc
            for t in range(ts):
                dE[t] = AL[pos, t] * (dAl[t] - dots)
            for j in range(a):
                dQ[j] = 0.0
            for t in range(ts):
                for j in range(a):
                    u = U[pos, t, j]
                    g_att_v[j] += dE[t] * u
                    dPre[j] = dE[t] * self.att_v[j] * (1.0 - u * u)
                    dProj[t, j] += dPre[j]
                    dQ[j] += dPre[j]
            _outer(&S[pos, 0], &dQ[0], &g_att_ws[0, 0], h, a)
            _vmt(&dQ[0], &self.att_ws[0, 0], &dSP[0], h, a)

            for i in range(h):
                dS[i] = dSP[i]

        # ---- backward: initial state ----------------------------------------
        d_mean = np.zeros(d2)
        cdef double[::1] dMean = d_mean
        for i in range(h):
            dS[i] = dS[i] * (1.0 - s0_mv[i] * s0_mv[i])
        _outer(&mean_mv[0], &dS[0], &g_init_w[0, 0], d2, h)
        _acc(&g_init_b[0], &dS[0], h)
        _vmt(&dS[0], &self.init_w[0, 0], &dMean[0], d2, h)
        for t in range(ts):
            for i in range(d2):
                dAnn[t, i] += dMean[i] / ts

        # ---- backward: annotation projection ---------------------------------
        for t in range(ts):
            _outer(&ann_mv[t, 0], &dProj[t, 0], &g_att_wa[0, 0], d2, a)
            _acc(&g_att_b[0], &dProj[t, 0], a)
            _vmt(&dProj[t, 0], &self.att_wa[0, 0], &dAnn[t, 0], d2, a)

        # ---- backward: encoder directions ------------------------------------
        d_hcarry = np.empty(h)
        d_h = np.empty(h)
        zeros_h = np.zeros(h)
        cdef double[::1] dHC = d_hcarry, dH = d_h, Z0 = zeros_h
        cdef const double* hprev_ptr
        cdef Py_ssize_t bdir, col0, step
        for bdir in range(2):
            col0 = h if bdir else 0
            for i in range(h):
                dHC[i] = 0.0
            # walk positions in reverse processing order of this direction
            for step in range(ts - 1, -1, -1):
                t = ts - 1 - step if bdir else step
                for i in range(h):
                    dH[i] = dHC[i] + dAnn[t, col0 + i]
                    dHC[i] = 0.0
                if bdir:
                    if t + 1 < ts:
                        hprev_ptr = &hs[1, t + 1, 0]
                    else:
                        hprev_ptr = &Z0[0]
                else:
                    if t > 0:
                        hprev_ptr = &hs[0, t - 1, 0]
                    else:
                        hprev_ptr = &Z0[0]
                _gru_bwd(&dH[0], &eck[bdir, 0, t, 0], &eck[bdir, 1, t, 0],
                         &eck[bdir, 2, t, 0], &eck[bdir, 3, t, 0], hprev_ptr,
                         &dGI[0], &dGH[0], &dHC[0], h)
                if bdir:
                    _outer(&self.src_embed[src[t], 0], &dGI[0], &g_wb_x[0, 0], d, 3 * h)
                    _acc(&g_bb_x[0], &dGI[0], 3 * h)
                    _outer(hprev_ptr, &dGH[0], &g_wb_h[0, 0], h, 3 * h)
                    _acc(&g_bb_h[0], &dGH[0], 3 * h)
                    _vmt(&dGI[0], &self.wb_x[0, 0], &g_src_emb[src[t], 0], d, 3 * h)
                    _vmt(&dGH[0], &self.wb_h[0, 0], &dHC[0], h, 3 * h)
                else:
                    _outer(&self.src_embed[src[t], 0], &dGI[0], &g_wf_x[0, 0], d, 3 * h)
                    _acc(&g_bf_x[0], &dGI[0], 3 * h)
                    _outer(hprev_ptr, &dGH[0], &g_wf_h[0, 0], h, 3 * h)
                    _acc(&g_bf_h[0], &dGH[0], 3 * h)
                    _vmt(&dGI[0], &self.wf_x[0, 0], &g_src_emb[src[t], 0], d, 3 * h)
                    _vmt(&dGH[0], &self.wf_h[0, 0], &dHC[0], h, 3 * h)

        return loss
