"""Tracker checkpoints: config echo, hidden layer and model state in one blob.

Layout (little-endian)::

    magic[8] = b"WOTRACK\\0"   version:u32
    frame_index:u64  box x,y,w,h: 4 x i64  frame height,width: 2 x u32
    config_len:u32  config text (UTF-8 INI, as written by the config echo)
    n_hidden:u32 d:u32 activation_len:u32 activation (ASCII)
    input_weights: n_hidden*d f64   biases: n_hidden f64
    model: WOSELM state blob (see ``woselm.dumps``) to the end

The projection is not stored; it is regenerated from the seed in the config.
"""

from __future__ import annotations

import struct

import numpy as np

from . import config, woselm
from .elm import HiddenLayer
from .features import generate_projection
from .geometry import BBox
from .tracker import TrackerState

MAGIC = b"WOTRACK\x00"
VERSION = 1
_HEAD = struct.Struct("<8sIQqqqqIII")
_HID = struct.Struct("<III")


def dumps(state: TrackerState) -> bytes:
    text = config.tracker_to_text(state.config).encode("utf-8")
    b = state.current_box
    h = state.hidden
    act = h.activation.encode("ascii")
    return b"".join([
        _HEAD.pack(MAGIC, VERSION, state.frame_index, b.x, b.y, b.w, b.h,
                   state.frame_shape[0], state.frame_shape[1], len(text)),
        text,
        _HID.pack(h.n_hidden, h.d, len(act)), act,
        np.ascontiguousarray(h.input_weights, dtype="<f8").tobytes(),
        np.ascontiguousarray(h.biases, dtype="<f8").tobytes(),
        woselm.dumps(state.model),
    ])


def loads(blob: bytes) -> TrackerState:
    magic, version, frame_index, x, y, w, hh, fh, fw, n_text = _HEAD.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ValueError("not a tracker checkpoint")
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    off = _HEAD.size
    cfg = config.from_text(blob[off:off + n_text].decode("utf-8")).tracker
    off += n_text
    L, d, n_act = _HID.unpack_from(blob, off)
    off += _HID.size
    act = blob[off:off + n_act].decode("ascii")
    off += n_act
    a = np.frombuffer(blob, "<f8", L * d, off).reshape(L, d).copy()
    off += 8 * L * d
    bias = np.frombuffer(blob, "<f8", L, off).copy()
    off += 8 * L
    model = woselm.loads(blob[off:])
    proj = generate_projection(cfg.projection_seed, cfg.feature_dim, w, hh)
    return TrackerState(cfg, proj, HiddenLayer(a, bias, act), model, BBox(x, y, w, hh),
                        frame_index, (fh, fw))
