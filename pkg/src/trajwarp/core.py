"""Domain types and the geometric normalisation of skeleton/object data.

Positions are stored in metres with z pointing up. A ``RawSequence`` keeps
the camera-space frames; ``to_trajectory_sample`` flattens an aligned
sequence into ``K = (J + O) * 3`` one-dimensional sub-signals ordered as
joint 0 (x, y, z), joint 1 (x, y, z), ..., then objects in canonical order.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DegenerateOrientation, EmptySequence, ObjectOverflow

HEADING_TOL = 1e-6


@dataclass(frozen=True)
class Frame:
    joint_positions: np.ndarray
    object_positions: np.ndarray
    timestamp_index: int = 0


@dataclass
class RawSequence:
    """One recorded action sample in camera coordinates.

    ``joints`` has shape ``(T, J, 3)`` and ``objects`` ``(T, n_objects, 3)``;
    ``object_ids`` names the object axis of ``objects``.
    """

    joints: np.ndarray
    objects: np.ndarray | None = None
    object_ids: tuple = ()
    class_label: int = 0
    subject_id: int = 0
    sample_index: int = 0
    group: str | None = None
    provenance: str = ""

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=float)
        if self.joints.ndim != 3 or self.joints.shape[-1] != 3:
            raise ValueError(f"joints must have shape (T, J, 3), got {self.joints.shape}")
        if self.joints.shape[0] == 0:
            raise EmptySequence("a sequence needs at least one frame")
        if self.objects is None:
            self.objects = np.zeros((self.joints.shape[0], 0, 3))
        self.objects = np.asarray(self.objects, dtype=float).reshape(self.joints.shape[0], -1, 3)
        self.object_ids = tuple(self.object_ids)
        if len(self.object_ids) != self.objects.shape[1]:
            raise ValueError("object_ids must name every tracked object")
        if not (np.all(np.isfinite(self.joints)) and np.all(np.isfinite(self.objects))):
            raise ValueError("coordinates must be finite")

    @classmethod
    def from_frames(cls, frames: Sequence[Frame], object_ids=(), **meta) -> "RawSequence":
        if len(frames) == 0:
            raise EmptySequence("empty frame list")
        joints = np.stack([np.asarray(f.joint_positions, dtype=float) for f in frames])
        objects = np.stack([np.asarray(f.object_positions, dtype=float).reshape(-1, 3) for f in frames])
        return cls(joints=joints, objects=objects, object_ids=object_ids, **meta)

    @property
    def n_frames(self) -> int:
        return self.joints.shape[0]

    @property
    def n_joints(self) -> int:
        return self.joints.shape[1]

    @property
    def frames(self) -> list[Frame]:
        return [Frame(self.joints[t], self.objects[t], t) for t in range(self.n_frames)]

    def replace(self, **changes) -> "RawSequence":
        return dataclasses.replace(self, **changes)


@dataclass
class TrajectorySample:
    """A multidimensional signal: one 1-D array per joint/object axis."""

    sub_signals: list
    class_label: int = 0
    subject_id: int = 0
    sample_index: int = 0
    n_joints: int | None = None
    group: str | None = None
    # fold provenance, set by the evaluation driver ("train"/"test")
    provenance: str = ""

    def __post_init__(self):
        self.sub_signals = [np.asarray(x, dtype=float) for x in self.sub_signals]

    @property
    def K(self) -> int:
        return len(self.sub_signals)

    @property
    def lengths(self) -> tuple:
        return tuple(len(x) for x in self.sub_signals)

    def as_array(self) -> np.ndarray:
        """Stack into ``(K, T)``; only valid while all lengths agree."""
        if len(set(self.lengths)) != 1:
            raise ValueError("sub-signals have differing lengths")
        return np.vstack(self.sub_signals)

    def with_signals(self, sub_signals) -> "TrajectorySample":
        return dataclasses.replace(self, sub_signals=list(sub_signals))


@dataclass(frozen=True)
class SymmetryMap:
    """Left/right joint pairing used for handedness mirroring."""

    joint_pairs: tuple = ()
    axis: int = 0

    def __post_init__(self):
        seen = [j for pair in self.joint_pairs for j in pair]
        if len(seen) != len(set(seen)):
            raise ValueError("symmetry pairs must be disjoint")

    def permutation(self, n_joints: int) -> np.ndarray:
        perm = np.arange(n_joints)
        for left, right in self.joint_pairs:
            perm[left], perm[right] = right, left
        return perm


@dataclass(frozen=True)
class OrientationReference:
    """Which joints define the body origin and heading.

    ``hip`` is a joint index, or a tuple of indices whose mean is used
    (skeletons without a hip-centre joint). After alignment the vector
    from ``left_hip`` to ``right_hip``, projected on the ground plane,
    points along +x.
    """

    hip: int | tuple = 0
    left_hip: int = 1
    right_hip: int = 2

    def hip_point(self, joints: np.ndarray) -> np.ndarray:
        if isinstance(self.hip, (tuple, list)):
            return joints[..., list(self.hip), :].mean(axis=-2)
        return joints[..., self.hip, :]


def heading_rotation(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Rotation about z that sends the horizontal left->right vector to +x."""
    vx, vy = right[0] - left[0], right[1] - left[1]
    norm = np.hypot(vx, vy)
    if norm < HEADING_TOL:
        raise DegenerateOrientation(f"hip-to-hip horizontal distance {norm:.3g} m")
    c, s = vx / norm, vy / norm
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def align_frame(frame: Frame, reference: OrientationReference = OrientationReference(),
                rotation: np.ndarray | None = None) -> Frame:
    """Translate the hip to the origin and rotate about z to the canonical heading.

    The same rigid transform is applied to the joints and to every object.
    Pass ``rotation`` to reuse a heading when this frame's hips are degenerate.
    """
    joints = np.asarray(frame.joint_positions, dtype=float)
    objects = np.asarray(frame.object_positions, dtype=float).reshape(-1, 3)
    hip = reference.hip_point(joints)
    if rotation is None:
        rotation = heading_rotation(joints[reference.left_hip], joints[reference.right_hip])
    return Frame((joints - hip) @ rotation.T, (objects - hip) @ rotation.T, frame.timestamp_index)


def align_sequence(seq: RawSequence, reference: OrientationReference = OrientationReference()) -> RawSequence:
    """Per-frame alignment of a whole sequence.

    Degenerate frames reuse the previous frame's rotation; leading
    degenerate frames borrow the first valid one, and a sequence with no
    valid heading at all is only translated.
    """
    rotations = []
    for t in range(seq.n_frames):
        try:
            rotations.append(heading_rotation(seq.joints[t, reference.left_hip],
                                              seq.joints[t, reference.right_hip]))
        except DegenerateOrientation:
            rotations.append(None)
    first = next((r for r in rotations if r is not None), np.eye(3))
    prev = first
    for t, r in enumerate(rotations):
        if r is None:
            rotations[t] = prev
        else:
            prev = r
    R = np.stack(rotations)                              # (T, 3, 3)
    hip = reference.hip_point(seq.joints)[:, None, :]    # (T, 1, 3)
    joints = np.einsum("tij,tnj->tni", R, seq.joints - hip)
    objects = np.einsum("tij,tnj->tni", R, seq.objects - hip)
    return seq.replace(joints=joints, objects=objects)


def canonical_object_order(object_ids: Sequence) -> list[int]:
    # stable sort keeps first-appearance order among equal ids
    return sorted(range(len(object_ids)), key=lambda i: str(object_ids[i]))


def to_trajectory_sample(seq: RawSequence, max_objects: int = 0) -> TrajectorySample:
    """Flatten an aligned sequence into ``(J + max_objects) * 3`` sub-signals.

    Missing objects are placed at the hip, which is the origin after
    alignment, so their sub-signals are identically zero.
    """
    n_obj = seq.objects.shape[1]
    if n_obj > max_objects:
        raise ObjectOverflow(f"{n_obj} tracked objects exceed max_objects={max_objects}")
    T = seq.n_frames
    objects = np.zeros((T, max_objects, 3))
    objects[:, :n_obj] = seq.objects[:, canonical_object_order(seq.object_ids)]
    points = np.concatenate([seq.joints, objects], axis=1)        # (T, J+O, 3)
    signals = points.transpose(1, 2, 0).reshape(-1, T)
    return TrajectorySample(
        sub_signals=list(signals),
        class_label=seq.class_label,
        subject_id=seq.subject_id,
        sample_index=seq.sample_index,
        n_joints=seq.n_joints,
        group=seq.group,
        provenance=seq.provenance,
    )


def mirror_sample(s: TrajectorySample, symmetry: SymmetryMap) -> TrajectorySample:
    """Reflect an aligned sample across the body's bisector plane.

    Paired left/right joints swap sub-signals, the mirrored axis is negated
    for every point (objects included).
    """
    if s.n_joints is None:
        raise ValueError("mirror_sample needs a sample with known n_joints")
    J = s.n_joints
    n_points = s.K // 3
    perm = np.concatenate([symmetry.permutation(J), np.arange(J, n_points)])
    out = []
    for point in perm:
        for axis in range(3):
            x = s.sub_signals[3 * point + axis]
            out.append(-x if axis == symmetry.axis else x.copy())
    return s.with_signals(out)


def mirror_sequence(seq: RawSequence, symmetry: SymmetryMap) -> RawSequence:
    """Camera-space counterpart of ``mirror_sample`` (reflects through x=0)."""
    sign = np.ones(3)
    sign[symmetry.axis] = -1.0
    joints = seq.joints[:, symmetry.permutation(seq.n_joints)] * sign
    return seq.replace(joints=joints, objects=seq.objects * sign)
