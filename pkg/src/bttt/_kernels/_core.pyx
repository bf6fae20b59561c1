# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel lane: window evaluation, incremental win check, rollouts.

Mirrors _kernels/pure.py exactly, including the PCG32 stream.
Lookup tables are injected once at import time via set_tables().
"""
from libc.math cimport INFINITY, log, sqrt
from libc.stdint cimport int32_t, uint8_t, uint32_t, uint64_t

import numpy as np

LANE = "compiled"

cdef int32_t[::1] WIN_SQ        # 88 windows x 4 squares, flattened
cdef int32_t[::1] AT_OFF        # 50 offsets into AT_WIN, per square
cdef int32_t[::1] AT_WIN        # window indices through each square
cdef double[::1] CODE_VALUES    # 256-entry base-4 pattern values
cdef int N_WINDOWS = 0

DEF N_SQUARES = 49
DEF EMPTY = 0
DEF PIECE_O = 1
DEF PIECE_X = 2

cdef uint64_t PCG_MULT = 6364136223846793005u


def set_tables(win_sq, code_values, at_off, at_win):
    global WIN_SQ, AT_OFF, AT_WIN, CODE_VALUES, N_WINDOWS
    WIN_SQ = np.ascontiguousarray(win_sq, dtype=np.int32)
    CODE_VALUES = np.ascontiguousarray(code_values, dtype=np.float64)
    AT_OFF = np.ascontiguousarray(at_off, dtype=np.int32)
    AT_WIN = np.ascontiguousarray(at_win, dtype=np.int32)
    N_WINDOWS = WIN_SQ.shape[0] // 4


cdef inline uint32_t _pcg_out(uint64_t s) nogil:
    cdef uint32_t xorshifted = <uint32_t>((((s >> 18) ^ s) >> 27) & 0xFFFFFFFFu)
    cdef uint32_t rot = <uint32_t>(s >> 59)
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u))


cdef inline uint32_t _pcg_next(uint64_t* state) nogil:
    cdef uint64_t s = state[0]
    state[0] = s * PCG_MULT + 1u
    return _pcg_out(s)


cdef inline uint64_t _pcg_seed(uint64_t seed) nogil:
    # matches PCG32(seed, seq=0): inc = 1
    cdef uint64_t state = 0
    state = state * PCG_MULT + 1u
    state = state + seed
    state = state * PCG_MULT + 1u
    return state


cdef inline bint _wins_at(const uint8_t* board, int last) nogil:
    cdef uint8_t piece = board[last]
    cdef int k, base
    for k in range(AT_OFF[last], AT_OFF[last + 1]):
        base = AT_WIN[k] * 4
        if (board[WIN_SQ[base]] == piece and board[WIN_SQ[base + 1]] == piece
                and board[WIN_SQ[base + 2]] == piece and board[WIN_SQ[base + 3]] == piece):
            return True
    return False


def evaluate(const unsigned char[:] cells) -> float:
    cdef double total = 0.0
    cdef int w, base, code
    for w in range(N_WINDOWS):
        base = w * 4
        code = ((cells[WIN_SQ[base]] << 6) | (cells[WIN_SQ[base + 1]] << 4)
                | (cells[WIN_SQ[base + 2]] << 2) | cells[WIN_SQ[base + 3]])
        total += CODE_VALUES[code]
    return total


def wins_at(cells, int last) -> bool:
    cdef const unsigned char[:] view = bytes(cells)
    return _wins_at(&view[0], last)


def uct_argmax(const double[::1] v, const double[::1] n, const int32_t[::1] order,
               double total, double c) -> int:
    """Square maximizing v[s]/n[s] + c*sqrt(log(total)/n[s]) over `order`.

    `order` lists the candidate squares in ascending order, so ties resolve
    to the lowest square.  v and n are indexed by square.
    """
    cdef double log_total = log(total)
    cdef double best_score = -INFINITY
    cdef double score
    cdef int best_sq = -1
    cdef int i, s
    for i in range(order.shape[0]):
        s = order[i]
        score = v[s] / n[s] + c * sqrt(log_total / n[s])
        if score > best_score:
            best_sq, best_score = s, score
    return best_sq


def rollout(const unsigned char[:] cells, int side, seed) -> int:
    cdef uint8_t board[N_SQUARES]
    cdef int32_t empties[N_SQUARES]
    cdef int count = 0
    cdef int i, j, sq
    cdef uint64_t state = _pcg_seed(<uint64_t>seed)
    for i in range(N_SQUARES):
        board[i] = cells[i]
        if board[i] == EMPTY:
            empties[count] = i
            count += 1
    while count > 0:
        j = <int>(_pcg_next(&state) % <uint32_t>count)
        sq = empties[j]
        board[sq] = <uint8_t>side
        if _wins_at(board, sq):
            return 1 if side == PIECE_O else -1
        count -= 1
        empties[j] = empties[count]
        side = PIECE_O + PIECE_X - side
    return -1
