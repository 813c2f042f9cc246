"""Parametric synthetic action data for desk-scale testing.

Each class moves a few upper-body joints along its own mixture of
sinusoid, ramp and arc components. Samples differ by subject (body scale,
motion amplitude, small joint offsets), by a uniform speed factor that
changes their length, by Gaussian noise, and by a random camera placement
that the alignment step has to undo. Subjects listed as left-handed
perform the mirror image of each action.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RawSequence, mirror_sequence
from .exceptions import InvalidSpec
from .skeletons import SKELETONS

SKELETON = SKELETONS["cad60"]

# person-centric rest pose (metres, z up, mid-hip at the origin)
REST_POSE = np.array([
    [0.00, 0.00, 0.70],    # HEAD
    [0.00, 0.00, 0.50],    # NECK
    [0.00, 0.00, 0.25],    # TORSO
    [-0.18, 0.00, 0.48],   # LEFT_SHOULDER
    [-0.22, 0.00, 0.20],   # LEFT_ELBOW
    [0.18, 0.00, 0.48],    # RIGHT_SHOULDER
    [0.22, 0.00, 0.20],    # RIGHT_ELBOW
    [-0.10, 0.00, 0.00],   # LEFT_HIP
    [-0.10, 0.00, -0.45],  # LEFT_KNEE
    [0.10, 0.00, 0.00],    # RIGHT_HIP
    [0.10, 0.00, -0.45],   # RIGHT_KNEE
    [-0.24, 0.00, -0.05],  # LEFT_HAND
    [0.24, 0.00, -0.05],   # RIGHT_HAND
    [-0.10, 0.00, -0.90],  # LEFT_FOOT
    [0.10, 0.00, -0.90],   # RIGHT_FOOT
])

_J = {name: i for i, name in enumerate(SKELETON.joints)}
# joints a class may move, and how strongly relative to the hand
_ACTIVE = {"RIGHT_HAND": 1.0, "RIGHT_ELBOW": 0.5, "LEFT_HAND": 0.6, "LEFT_ELBOW": 0.3,
           "HEAD": 0.25, "NECK": 0.15, "TORSO": 0.1}


def _basis(u):
    return np.stack([np.sin(np.pi * u), np.sin(2 * np.pi * u), u, np.sin(np.pi * u) ** 2,
                     np.sin(3 * np.pi * u)])


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int = 3
    n_subjects: int = 4
    reps: int = 5
    noise: float = 0.02
    speed_range: tuple = (0.7, 1.4)
    base_frames: int = 60
    style: float = 1.0
    n_objects: int = 0
    left_handed: tuple = ()
    random_camera: bool = True

    def validate(self):
        if min(self.n_classes, self.n_subjects, self.reps) < 1:
            raise InvalidSpec("n_classes, n_subjects and reps must be positive")
        lo, hi = self.speed_range
        if not 0 < lo <= hi:
            raise InvalidSpec(f"bad speed range {self.speed_range}")
        if self.noise < 0 or self.style < 0:
            raise InvalidSpec("noise and style must be non-negative")
        if self.base_frames < 4 or round(self.base_frames / hi) < 2:
            raise InvalidSpec("sequences would be shorter than 2 frames")
        if self.n_objects < 0:
            raise InvalidSpec("n_objects must be non-negative")


def _class_motion(rng):
    """Coefficients (n_active, 3 axes, n_basis) for one class."""
    n_basis = _basis(np.zeros(1)).shape[0]
    coeffs = rng.normal(0.0, 0.12, size=(len(_ACTIVE), 3, n_basis))
    # each class leans on a couple of dominant components
    dominant = rng.choice(n_basis, size=2, replace=False)
    coeffs[:, :, dominant] += rng.choice([-1, 1], size=(len(_ACTIVE), 3, 2)) * 0.2
    scale = np.array(list(_ACTIVE.values()))[:, None, None]
    return coeffs * scale


def class_trajectory(motion, u, body_scale=1.0, amplitude=1.0, offsets=None):
    """Person-centric joint positions ``(T, 15, 3)`` for one execution."""
    T = len(u)
    pose = np.repeat(REST_POSE[None] * body_scale, T, axis=0)
    disp = np.einsum("kab,bt->tka", motion, _basis(u)) * amplitude
    for i, name in enumerate(_ACTIVE):
        pose[:, _J[name]] += disp[:, i]
    if offsets is not None:
        pose += offsets
    return pose


def _camera(rng, joints, objects):
    theta = rng.uniform(-np.pi, np.pi)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    shift = np.array([rng.uniform(-1, 1), rng.uniform(1.5, 3.5), rng.uniform(0.8, 1.1)])
    return joints @ R.T + shift, objects @ R.T + shift


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec(), seed: int = 0) -> list[RawSequence]:
    """Labelled camera-space sequences, ``reps`` per (class, subject).

    Class labels run 1..n_classes and subject ids 1..n_subjects; every
    class has exactly ``n_subjects * reps`` samples.
    """
    spec.validate()
    root = np.random.SeedSequence(seed)
    class_ss, subject_ss, sample_ss = root.spawn(3)
    motions = [_class_motion(np.random.default_rng(s)) for s in class_ss.spawn(spec.n_classes)]
    table_spots = [np.random.default_rng(s).uniform(-0.4, 0.4, size=(max(spec.n_objects, 1), 3))
                   for s in class_ss.spawn(spec.n_classes)]
    subjects = []
    for ss in subject_ss.spawn(spec.n_subjects):
        rng = np.random.default_rng(ss)
        subjects.append((
            1.0 + spec.style * rng.uniform(-0.1, 0.1),
            1.0 + spec.style * rng.uniform(-0.15, 0.15),
            spec.style * rng.normal(0.0, 0.01, size=(len(REST_POSE), 3)),
        ))
    rng = np.random.default_rng(sample_ss)
    out = []
    for c in range(spec.n_classes):
        j = 0
        for subj in range(spec.n_subjects):
            body, amp, offsets = subjects[subj]
            for _ in range(spec.reps):
                speed = rng.uniform(*spec.speed_range)
                T = max(2, int(round(spec.base_frames / speed)))
                u = np.linspace(0.0, 1.0, T)
                joints = class_trajectory(motions[c], u, body, amp, offsets)
                n_obj = min(spec.n_objects, 1 + c % max(spec.n_objects, 1))
                objects = np.zeros((T, n_obj, 3))
                if n_obj:
                    objects[:, 0] = joints[:, _J["RIGHT_HAND"]] + [0.0, -0.05, 0.05]
                    objects[:, 1:] = table_spots[c][1:n_obj]
                seq = RawSequence(joints, objects, tuple(f"obj{i}" for i in range(n_obj)),
                                  class_label=c + 1, subject_id=subj + 1, sample_index=j)
                if subj + 1 in spec.left_handed:
                    seq = mirror_sequence(seq, SKELETON.symmetry)
                joints, objects = seq.joints, seq.objects
                if spec.random_camera:
                    joints, objects = _camera(rng, joints, objects)
                if spec.noise > 0:
                    joints = joints + rng.normal(0.0, spec.noise, size=joints.shape)
                    objects = objects + rng.normal(0.0, spec.noise, size=objects.shape)
                out.append(seq.replace(joints=joints, objects=objects))
                j += 1
    return out


def time_reparameterize(seq: RawSequence, speed: float) -> RawSequence:
    """Replay ``seq`` ``speed`` times faster by linear interpolation in time."""
    T = seq.n_frames
    n = max(2, int(round(T / speed)))
    src = np.linspace(0.0, T - 1, n)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, T - 1)
    w = (src - lo)[:, None, None]
    joints = seq.joints[lo] * (1 - w) + seq.joints[hi] * w
    objects = seq.objects[lo] * (1 - w) + seq.objects[hi] * w
    return seq.replace(joints=joints, objects=objects)
