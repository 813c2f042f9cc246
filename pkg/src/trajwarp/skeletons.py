"""Static joint tables: names, orientation references and symmetry maps.

Joint orders follow each dataset's published skeleton. All loaders emit
joints in exactly these orders.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import OrientationReference, SymmetryMap


@dataclass(frozen=True)
class Skeleton:
    name: str
    joints: tuple
    reference: OrientationReference
    symmetry: SymmetryMap

    @property
    def n_joints(self):
        return len(self.joints)

    def index(self, joint: str) -> int:
        return self.joints.index(joint)


def _pairs(joints, suffixes):
    return tuple((joints.index(f"LEFT_{s}"), joints.index(f"RIGHT_{s}")) for s in suffixes)


# CAD-60 / CAD-120 (OpenNI, 15 joints)
_CAD = ("HEAD", "NECK", "TORSO", "LEFT_SHOULDER", "LEFT_ELBOW", "RIGHT_SHOULDER",
        "RIGHT_ELBOW", "LEFT_HIP", "LEFT_KNEE", "RIGHT_HIP", "RIGHT_KNEE",
        "LEFT_HAND", "RIGHT_HAND", "LEFT_FOOT", "RIGHT_FOOT")

# UCF-Kinect (OpenNI, 15 joints, limb-major order)
_UCF = ("HEAD", "NECK", "TORSO", "LEFT_SHOULDER", "LEFT_ELBOW", "LEFT_HAND",
        "RIGHT_SHOULDER", "RIGHT_ELBOW", "RIGHT_HAND", "LEFT_HIP", "LEFT_KNEE",
        "LEFT_FOOT", "RIGHT_HIP", "RIGHT_KNEE", "RIGHT_FOOT")

# UT-Kinect (Kinect SDK v1, 20 joints)
_KV1 = ("HIP_CENTER", "SPINE", "SHOULDER_CENTER", "HEAD",
        "LEFT_SHOULDER", "LEFT_ELBOW", "LEFT_WRIST", "LEFT_HAND",
        "RIGHT_SHOULDER", "RIGHT_ELBOW", "RIGHT_WRIST", "RIGHT_HAND",
        "LEFT_HIP", "LEFT_KNEE", "LEFT_ANKLE", "LEFT_FOOT",
        "RIGHT_HIP", "RIGHT_KNEE", "RIGHT_ANKLE", "RIGHT_FOOT")

# TST Fall Detection v2 (Kinect SDK v2, 25 joints)
_KV2 = ("SPINE_BASE", "SPINE_MID", "NECK", "HEAD") + _KV1[4:] + (
    "SPINE_SHOULDER", "LEFT_HANDTIP", "LEFT_THUMB", "RIGHT_HANDTIP", "RIGHT_THUMB")


def _midhip(joints, suffixes):
    left, right = joints.index("LEFT_HIP"), joints.index("RIGHT_HIP")
    return Skeleton("", joints, OrientationReference((left, right), left, right),
                    SymmetryMap(_pairs(joints, suffixes), axis=0))


def _centred(joints, hip, suffixes):
    return Skeleton("", joints,
                    OrientationReference(joints.index(hip), joints.index("LEFT_HIP"),
                                         joints.index("RIGHT_HIP")),
                    SymmetryMap(_pairs(joints, suffixes), axis=0))


def _named(name, sk):
    return Skeleton(name, sk.joints, sk.reference, sk.symmetry)


_LIMBS_15 = ("SHOULDER", "ELBOW", "HAND", "HIP", "KNEE", "FOOT")
_LIMBS_20 = ("SHOULDER", "ELBOW", "WRIST", "HAND", "HIP", "KNEE", "ANKLE", "FOOT")

SKELETONS = {
    "cad60": _named("cad60", _midhip(_CAD, _LIMBS_15)),
    "ucfkinect": _named("ucfkinect", _midhip(_UCF, _LIMBS_15)),
    "kinect_v1": _named("kinect_v1", _centred(_KV1, "HIP_CENTER", _LIMBS_20)),
    "kinect_v2": _named("kinect_v2", _centred(_KV2, "SPINE_BASE", _LIMBS_20 + ("HANDTIP", "THUMB"))),
}
SKELETONS["cad120"] = _named("cad120", SKELETONS["cad60"])

# default skeleton per joint count
_BY_COUNT = {15: "cad60", 20: "kinect_v1", 25: "kinect_v2"}


def get_skeleton(name_or_skeleton=None, n_joints: int | None = None) -> Skeleton:
    if isinstance(name_or_skeleton, Skeleton):
        return name_or_skeleton
    if name_or_skeleton is not None:
        try:
            return SKELETONS[name_or_skeleton]
        except KeyError:
            raise ValueError(f"unknown skeleton {name_or_skeleton!r}; "
                             f"known: {sorted(SKELETONS)}") from None
    if n_joints in _BY_COUNT:
        return SKELETONS[_BY_COUNT[n_joints]]
    raise ValueError(f"no default skeleton for {n_joints} joints; pass one explicitly")
