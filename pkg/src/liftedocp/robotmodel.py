"""Kinematic-tree robot models, the plain-text model format, and builtin robots.

Model file grammar
------------------
UTF-8 text, one ``key = value`` pair per line. ``#`` starts a comment. Lines
are grouped into sections opened by a header line:

``[model]`` (optional, at most once)
    ``name`` (string), ``gravity`` (3 floats, default ``0 0 -9.81``)
``[link]``
    ``name`` (required), ``mass`` (required, > 0), ``com`` (3 floats),
    ``inertia`` (6 floats ``ixx iyy izz ixy ixz iyz`` about the COM)
``[joint]``
    ``name``, ``type`` (``floating``/``revolute``/``prismatic``), ``parent``
    (a link name or ``world``), ``child`` (required); ``xyz``, ``rpy``
    (placement in the parent frame, rpy as fixed-axis roll-pitch-yaw);
    ``axis`` (3 floats, required for revolute and prismatic joints, not allowed
    for floating ones); ``actuated`` (``true``/``false``; default ``false``
    for floating joints, ``true`` otherwise)
``[contact_frame]``
    ``name``, ``parent`` (required); ``xyz``, ``rpy``; ``axes`` (subset of
    ``xyz`` naming the constrained world directions, default ``xyz``)

Numbers are decimal floats. Unknown keys and sections are rejected. Passive
degrees of freedom must precede actuated ones so that the selection matrix is
``S = [O I]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .liegroup import ConfigurationSpace

JOINT_TYPES = ("floating", "revolute", "prismatic")
DEFAULT_GRAVITY = (0.0, 0.0, -9.81)


class ModelError(ValueError):
    """Raised for a model that violates a structural or physical invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Link:
    name: str
    mass: float
    com: tuple[float, float, float] = (0.0, 0.0, 0.0)
    # ixx iyy izz ixy ixz iyz about the center of mass
    inertia: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def inertia_matrix(self) -> np.ndarray:
        ixx, iyy, izz, ixy, ixz, iyz = self.inertia
        return np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])


@dataclass(frozen=True)
class Joint:
    name: str
    type: str
    parent: str
    child: str
    xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] | None = None
    actuated: bool = True

    @property
    def nq(self) -> int:
        return 7 if self.type == "floating" else 1

    @property
    def nv(self) -> int:
        return 6 if self.type == "floating" else 1


@dataclass(frozen=True)
class ContactFrame:
    name: str
    parent: str
    xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axes: str = "xyz"

    @property
    def axis_indices(self) -> tuple[int, ...]:
        return tuple("xyz".index(c) for c in self.axes)


def rpy_to_matrix(rpy) -> np.ndarray:
    r, p, y = rpy
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


def spatial_inertia(mass: float, com: np.ndarray, inertia_com: np.ndarray) -> np.ndarray:
    """6x6 spatial inertia about the body origin, ordering [linear; angular]."""
    c = np.asarray(com, dtype=float)
    C = np.array([[0.0, -c[2], c[1]], [c[2], 0.0, -c[0]], [-c[1], c[0], 0.0]])
    out = np.zeros((6, 6))
    out[:3, :3] = mass * np.eye(3)
    out[:3, 3:] = -mass * C
    out[3:, :3] = mass * C
    out[3:, 3:] = inertia_com - mass * C @ C
    return out


@dataclass(frozen=True)
class ContactStatus:
    """Which contact frames are enforced, and where they should be."""

    active: tuple[bool, ...]
    reference_positions: np.ndarray = field(compare=False)

    @classmethod
    def make(cls, model: "RobotModel", active, reference_positions=None) -> "ContactStatus":
        active = tuple(bool(a) for a in active)
        if len(active) != len(model.contact_frames):
            raise ValueError(
                f"status has {len(active)} entries, model has {len(model.contact_frames)} contact frames"
            )
        refs = np.zeros((len(active), 3))
        if reference_positions is not None:
            refs[:] = np.asarray(reference_positions, dtype=float).reshape(len(active), 3)
        return cls(active, refs)

    @classmethod
    def none(cls, model: "RobotModel") -> "ContactStatus":
        return cls.make(model, [False] * len(model.contact_frames))

    @property
    def num_active(self) -> int:
        return sum(self.active)

    def active_indices(self) -> list[int]:
        return [k for k, a in enumerate(self.active) if a]


class RobotModel:
    """An immutable, validated kinematic tree.

    Joints are reordered depth-first from the world (file order among
    siblings); each joint moves exactly one child link, which becomes a body
    with the joint's index.
    """

    def __init__(
        self,
        links,
        joints,
        contact_frames=(),
        gravity=DEFAULT_GRAVITY,
        name: str = "robot",
        _lines: dict | None = None,
    ):
        lines = _lines or {}
        self.name = name
        self.links = tuple(links)
        self.contact_frames = tuple(contact_frames)
        self.gravity = np.array(gravity, dtype=float)

        link_by_name: dict[str, Link] = {}
        for link in self.links:
            ln = lines.get(("link", link.name))
            if link.name in link_by_name or link.name == "world":
                raise ModelError(f"duplicate link name '{link.name}'", ln)
            if not link.mass > 0.0:
                raise ModelError(f"link '{link.name}' has non-positive mass {link.mass}", ln)
            Ic = link.inertia_matrix()
            if np.min(np.linalg.eigvalsh(Ic)) < -1e-12:
                raise ModelError(f"link '{link.name}' has an inertia that is not positive semidefinite", ln)
            link_by_name[link.name] = link

        child_joint: dict[str, Joint] = {}
        names = set()
        for jt in joints:
            ln = lines.get(("joint", jt.name))
            if jt.name in names:
                raise ModelError(f"duplicate joint name '{jt.name}'", ln)
            names.add(jt.name)
            if jt.type not in JOINT_TYPES:
                raise ModelError(f"joint '{jt.name}' has unknown type '{jt.type}'", ln)
            if jt.parent != "world" and jt.parent not in link_by_name:
                raise ModelError(f"joint '{jt.name}' references missing parent link '{jt.parent}'", ln)
            if jt.child not in link_by_name:
                raise ModelError(f"joint '{jt.name}' references missing child link '{jt.child}'", ln)
            if jt.child in child_joint:
                raise ModelError(f"link '{jt.child}' has more than one parent joint", ln)
            if jt.type == "floating":
                if jt.parent != "world":
                    raise ModelError(f"floating joint '{jt.name}' must have parent 'world'", ln)
                if jt.axis is not None:
                    raise ModelError(f"floating joint '{jt.name}' takes no axis", ln)
                if jt.actuated:
                    raise ModelError(f"floating joint '{jt.name}' cannot be actuated", ln)
            else:
                if jt.axis is None or np.linalg.norm(jt.axis) < 1e-12:
                    raise ModelError(f"joint '{jt.name}' needs a non-zero axis", ln)
            child_joint[jt.child] = jt

        for link in self.links:
            if link.name not in child_joint:
                raise ModelError(
                    f"link '{link.name}' is not attached by any joint", lines.get(("link", link.name))
                )
        # every link must reach the world through its parents
        for link in self.links:
            seen = set()
            cur = link.name
            while cur != "world":
                if cur in seen:
                    jt = child_joint[link.name]
                    raise ModelError(f"kinematic cycle through link '{link.name}'", lines.get(("joint", jt.name)))
                seen.add(cur)
                cur = child_joint[cur].parent

        # depth-first ordering from the world, siblings in declaration order
        children: dict[str, list[Joint]] = {}
        for jt in joints:
            children.setdefault(jt.parent, []).append(jt)
        ordered: list[Joint] = []
        stack = list(reversed(children.get("world", [])))
        while stack:
            jt = stack.pop()
            ordered.append(jt)
            stack.extend(reversed(children.get(jt.child, [])))
        self.joints = tuple(ordered)
        self._declared_joints = tuple(joints)

        floating = [jt for jt in self.joints if jt.type == "floating"]
        if len(floating) > 1:
            raise ModelError("at most one floating joint is supported")
        if floating and self.joints[0] is not floating[0]:
            raise ModelError("the floating joint must be the only joint attached to the world")
        self.floating_base = bool(floating)
        self.space = ConfigurationSpace(
            sum(jt.nv for jt in self.joints if jt.type != "floating"), self.floating_base
        )

        # body-level arrays, indexed like self.joints
        body_index = {jt.child: k for k, jt in enumerate(self.joints)}
        self.body_names = tuple(jt.child for jt in self.joints)
        self.parents = tuple(-1 if jt.parent == "world" else body_index[jt.parent] for jt in self.joints)
        self.q_slices, self.v_slices = [], []
        iq = iv = 0
        actuated_flags = []
        self.motion_subspaces = []
        self.placement_rotations = []
        self.placement_translations = []
        self.axes = []
        self.inertias = []
        self.link_masses = []
        self.link_coms = []
        for jt in self.joints:
            self.q_slices.append(slice(iq, iq + jt.nq))
            self.v_slices.append(slice(iv, iv + jt.nv))
            iq += jt.nq
            iv += jt.nv
            actuated_flags += [jt.actuated] * jt.nv
            if jt.type == "floating":
                S = np.eye(6)
                axis = None
            else:
                axis = np.asarray(jt.axis, dtype=float)
                axis = axis / np.linalg.norm(axis)
                S = np.zeros((6, 1))
                if jt.type == "revolute":
                    S[3:, 0] = axis
                else:
                    S[:3, 0] = axis
            self.motion_subspaces.append(S)
            self.axes.append(axis)
            self.placement_rotations.append(rpy_to_matrix(jt.rpy))
            self.placement_translations.append(np.array(jt.xyz, dtype=float))
            link = link_by_name[jt.child]
            self.inertias.append(spatial_inertia(link.mass, np.array(link.com), link.inertia_matrix()))
            self.link_masses.append(link.mass)
            self.link_coms.append(np.array(link.com, dtype=float))
        self.q_slices = tuple(self.q_slices)
        self.v_slices = tuple(self.v_slices)
        self.nq = iq
        self.n = iv
        first_actuated = next((k for k, a in enumerate(actuated_flags) if a), len(actuated_flags))
        if any(actuated_flags[first_actuated:]) and not all(actuated_flags[first_actuated:]):
            raise ModelError("passive degrees of freedom must precede actuated ones (S = [O I])")
        self.n_a = len(actuated_flags) - first_actuated
        self.total_mass = float(sum(self.link_masses))

        self.contact_bodies = []
        self.contact_offsets = []
        frame_names = set()
        for cf in self.contact_frames:
            ln = lines.get(("contact_frame", cf.name))
            if cf.name in frame_names:
                raise ModelError(f"duplicate contact frame '{cf.name}'", ln)
            frame_names.add(cf.name)
            if cf.parent not in body_index:
                raise ModelError(f"contact frame '{cf.name}' references missing link '{cf.parent}'", ln)
            if not cf.axes or any(c not in "xyz" for c in cf.axes) or len(set(cf.axes)) != len(cf.axes):
                raise ModelError(f"contact frame '{cf.name}' has invalid axes '{cf.axes}'", ln)
            self.contact_bodies.append(body_index[cf.parent])
            self.contact_offsets.append(np.array(cf.xyz, dtype=float))
        self.n_f = 3 * len(self.contact_frames)

    # -- convenience -------------------------------------------------------
    @property
    def n_passive(self) -> int:
        return self.n - self.n_a

    def selection_matrix(self) -> np.ndarray:
        """S (n_a x n) with the [O I] layout."""
        S = np.zeros((self.n_a, self.n))
        S[:, self.n_passive:] = np.eye(self.n_a)
        return S

    def neutral(self) -> np.ndarray:
        return self.space.neutral()

    def contact_dim(self, status: ContactStatus) -> int:
        return sum(len(self.contact_frames[k].axes) for k in status.active_indices())

    def frame_index(self, name: str) -> int:
        for k, cf in enumerate(self.contact_frames):
            if cf.name == name:
                return k
        raise KeyError(name)

    def joint_q_index(self, name: str) -> int:
        for jt, sl in zip(self.joints, self.q_slices):
            if jt.name == name:
                return sl.start
        raise KeyError(name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RobotModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.links == other.links
            and self._declared_joints == other._declared_joints
            and self.contact_frames == other.contact_frames
            and tuple(self.gravity) == tuple(other.gravity)
        )

    def __hash__(self) -> int:
        return hash((self.name, self.links, self._declared_joints, self.contact_frames))

    def __repr__(self) -> str:
        return f"RobotModel({self.name!r}, n={self.n}, n_a={self.n_a}, n_f={self.n_f})"


# -- model file I/O ------------------------------------------------------------

_SECTION_KEYS = {
    "model": {"name", "gravity"},
    "link": {"name", "mass", "com", "inertia"},
    "joint": {"name", "type", "parent", "child", "xyz", "rpy", "axis", "actuated"},
    "contact_frame": {"name", "parent", "xyz", "rpy", "axes"},
}
_REQUIRED = {
    "model": set(),
    "link": {"name", "mass"},
    "joint": {"name", "type", "parent", "child"},
    "contact_frame": {"name", "parent"},
}


def _floats(value: str, count: int, key: str, line: int) -> tuple[float, ...]:
    parts = value.split()
    if len(parts) != count:
        raise ModelError(f"'{key}' expects {count} numbers, got {len(parts)}", line)
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ModelError(f"'{key}' has a non-numeric value '{value}'", line) from None


def _bool(value: str, key: str, line: int) -> bool:
    v = value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ModelError(f"'{key}' expects true/false, got '{value}'", line)


def load_model(text: str) -> RobotModel:
    """Parse model-file text into a validated :class:`RobotModel`."""
    sections: list[tuple[str, int, dict[str, tuple[str, int]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ModelError(f"malformed section header '{line}'", lineno)
            kind = line[1:-1].strip()
            if kind not in _SECTION_KEYS:
                raise ModelError(f"unknown section '[{kind}]'", lineno)
            sections.append((kind, lineno, {}))
            continue
        if "=" not in line:
            raise ModelError(f"expected 'key = value', got '{line}'", lineno)
        if not sections:
            raise ModelError("key-value pair outside of any section", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        kind, _, entries = sections[-1]
        if key not in _SECTION_KEYS[kind]:
            raise ModelError(f"unknown key '{key}' in [{kind}]", lineno)
        if key in entries:
            raise ModelError(f"duplicate key '{key}'", lineno)
        entries[key] = (value, lineno)

    links, joints, frames = [], [], []
    gravity = DEFAULT_GRAVITY
    name = "robot"
    lines: dict = {}
    seen_model = False
    for kind, header, e in sections:
        missing = _REQUIRED[kind] - set(e)
        if missing:
            raise ModelError(f"[{kind}] section is missing {sorted(missing)}", header)
        get = {k: v for k, (v, _) in e.items()}
        at = {k: ln for k, (_, ln) in e.items()}
        if kind == "model":
            if seen_model:
                raise ModelError("more than one [model] section", header)
            seen_model = True
            name = get.get("name", name)
            if "gravity" in get:
                gravity = _floats(get["gravity"], 3, "gravity", at["gravity"])
        elif kind == "link":
            link = Link(
                name=get["name"],
                mass=_floats(get["mass"], 1, "mass", at["mass"])[0],
                com=_floats(get["com"], 3, "com", at["com"]) if "com" in get else (0.0, 0.0, 0.0),
                inertia=_floats(get["inertia"], 6, "inertia", at["inertia"]) if "inertia" in get else (0.0,) * 6,
            )
            lines[("link", link.name)] = header
            links.append(link)
        elif kind == "joint":
            jtype = get["type"]
            if jtype not in JOINT_TYPES:
                raise ModelError(f"unknown joint type '{jtype}'", at["type"])
            jt = Joint(
                name=get["name"],
                type=jtype,
                parent=get["parent"],
                child=get["child"],
                xyz=_floats(get["xyz"], 3, "xyz", at["xyz"]) if "xyz" in get else (0.0, 0.0, 0.0),
                rpy=_floats(get["rpy"], 3, "rpy", at["rpy"]) if "rpy" in get else (0.0, 0.0, 0.0),
                axis=_floats(get["axis"], 3, "axis", at["axis"]) if "axis" in get else None,
                actuated=_bool(get["actuated"], "actuated", at["actuated"])
                if "actuated" in get
                else jtype != "floating",
            )
            lines[("joint", jt.name)] = header
            joints.append(jt)
        else:
            cf = ContactFrame(
                name=get["name"],
                parent=get["parent"],
                xyz=_floats(get["xyz"], 3, "xyz", at["xyz"]) if "xyz" in get else (0.0, 0.0, 0.0),
                rpy=_floats(get["rpy"], 3, "rpy", at["rpy"]) if "rpy" in get else (0.0, 0.0, 0.0),
                axes=get.get("axes", "xyz"),
            )
            lines[("contact_frame", cf.name)] = header
            frames.append(cf)
    return RobotModel(links, joints, frames, gravity=gravity, name=name, _lines=lines)


def load_model_file(path) -> RobotModel:
    return load_model(Path(path).read_text(encoding="utf-8"))


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dump_model(model: RobotModel) -> str:
    """Serialize a model so that ``load_model(dump_model(m)) == m``."""
    out = ["[model]", f"name = {model.name}", f"gravity = {_fmt(model.gravity)}", ""]
    for link in model.links:
        out += [
            "[link]",
            f"name = {link.name}",
            f"mass = {float(link.mass)!r}",
            f"com = {_fmt(link.com)}",
            f"inertia = {_fmt(link.inertia)}",
            "",
        ]
    for jt in model._declared_joints:
        out += [
            "[joint]",
            f"name = {jt.name}",
            f"type = {jt.type}",
            f"parent = {jt.parent}",
            f"child = {jt.child}",
            f"xyz = {_fmt(jt.xyz)}",
            f"rpy = {_fmt(jt.rpy)}",
        ]
        if jt.axis is not None:
            out.append(f"axis = {_fmt(jt.axis)}")
        out += [f"actuated = {'true' if jt.actuated else 'false'}", ""]
    for cf in model.contact_frames:
        out += [
            "[contact_frame]",
            f"name = {cf.name}",
            f"parent = {cf.parent}",
            f"xyz = {_fmt(cf.xyz)}",
            f"rpy = {_fmt(cf.rpy)}",
            f"axes = {cf.axes}",
            "",
        ]
    return "\n".join(out)


# -- builtin robots --------------------------------------------------------------

def _rod_inertia(mass: float, length: float, radius: float = 0.02) -> tuple[float, ...]:
    # slender cylinder along z
    ip = mass * (3 * radius**2 + length**2) / 12.0
    ia = 0.5 * mass * radius**2
    return (ip, ip, ia, 0.0, 0.0, 0.0)


def _box_inertia(mass: float, lx: float, ly: float, lz: float) -> tuple[float, ...]:
    return (
        mass * (ly**2 + lz**2) / 12.0,
        mass * (lx**2 + lz**2) / 12.0,
        mass * (lx**2 + ly**2) / 12.0,
        0.0,
        0.0,
        0.0,
    )


QUADRUPED_LEGS = ("LF", "RF", "LH", "RH")
QUADRUPED_THIGH = 0.3
QUADRUPED_SHANK = 0.3


def builtin_quadruped() -> RobotModel:
    """A 12-joint point-foot quadruped of medium-dog proportions.

    The inertial parameters are plausible magnitudes (20 kg base, 0.5-2 kg
    leg links), not those of any particular robot.
    """
    links = [Link("base", 20.0, (0.0, 0.0, 0.0), _box_inertia(20.0, 0.6, 0.3, 0.15))]
    joints = [Joint("base_joint", "floating", "world", "base", actuated=False)]
    frames = []
    hips = {"LF": (0.3, 0.1), "RF": (0.3, -0.1), "LH": (-0.3, 0.1), "RH": (-0.3, -0.1)}
    for leg in QUADRUPED_LEGS:
        hx, hy = hips[leg]
        side = 1.0 if hy > 0 else -1.0
        links += [
            Link(f"{leg}_hip", 2.0, (0.0, 0.0, 0.0), (0.004, 0.004, 0.004, 0.0, 0.0, 0.0)),
            Link(f"{leg}_thigh", 1.5, (0.0, 0.0, -QUADRUPED_THIGH / 2), _rod_inertia(1.5, QUADRUPED_THIGH)),
            Link(f"{leg}_shank", 0.5, (0.0, 0.0, -QUADRUPED_SHANK / 2), _rod_inertia(0.5, QUADRUPED_SHANK)),
        ]
        joints += [
            Joint(f"{leg}_HAA", "revolute", "base", f"{leg}_hip", (hx, hy, 0.0), axis=(1.0, 0.0, 0.0)),
            Joint(f"{leg}_HFE", "revolute", f"{leg}_hip", f"{leg}_thigh", (0.0, side * 0.05, 0.0), axis=(0.0, 1.0, 0.0)),
            Joint(f"{leg}_KFE", "revolute", f"{leg}_thigh", f"{leg}_shank", (0.0, 0.0, -QUADRUPED_THIGH), axis=(0.0, 1.0, 0.0)),
        ]
        frames.append(ContactFrame(f"{leg}_foot", f"{leg}_shank", (0.0, 0.0, -QUADRUPED_SHANK)))
    return RobotModel(links, joints, frames, name="quadruped")


def quadruped_standing_configuration(model: RobotModel, height: float | None = None) -> np.ndarray:
    """Nominal standing posture with bent knees and feet below the hips."""
    hfe, kfe = 0.6, -1.2
    q = model.neutral()
    for leg in QUADRUPED_LEGS:
        sign = 1.0 if leg.endswith("F") else -1.0
        q[model.joint_q_index(f"{leg}_HFE")] = sign * hfe
        q[model.joint_q_index(f"{leg}_KFE")] = sign * kfe
    if height is None:
        height = QUADRUPED_THIGH * np.cos(hfe) + QUADRUPED_SHANK * np.cos(hfe + kfe)
    q[2] = height
    return q


def builtin_monoped() -> RobotModel:
    """Planar hopping leg: x/z sliders and pitch as passive base, hip and knee actuated."""
    links = [
        Link("slider_x", 0.01),
        Link("slider_z", 0.01),
        Link("body", 5.0, (0.0, 0.0, 0.0), _box_inertia(5.0, 0.3, 0.1, 0.1)),
        Link("thigh", 1.0, (0.0, 0.0, -0.125), _rod_inertia(1.0, 0.25)),
        Link("shank", 0.5, (0.0, 0.0, -0.125), _rod_inertia(0.5, 0.25)),
    ]
    joints = [
        Joint("x", "prismatic", "world", "slider_x", axis=(1.0, 0.0, 0.0), actuated=False),
        Joint("z", "prismatic", "slider_x", "slider_z", axis=(0.0, 0.0, 1.0), actuated=False),
        Joint("pitch", "revolute", "slider_z", "body", axis=(0.0, 1.0, 0.0), actuated=False),
        Joint("hip", "revolute", "body", "thigh", axis=(0.0, 1.0, 0.0)),
        Joint("knee", "revolute", "thigh", "shank", (0.0, 0.0, -0.25), axis=(0.0, 1.0, 0.0)),
    ]
    frames = [ContactFrame("foot", "shank", (0.0, 0.0, -0.25), axes="xz")]
    return RobotModel(links, joints, frames, name="monoped")


def monoped_standing_configuration(model: RobotModel, knee: float = -1.0) -> np.ndarray:
    """Statically balanced stance: foot on the ground directly below the center of mass.

    The pitch joint is passive, so the hip angle is chosen (by bisection) to
    put the foot under the center of mass of every link it carries, i.e. all
    but the x slider, whose weight the world joint takes.
    """
    from .dynamics import forward_pass, point_kinematics

    first = [jt.name for jt in model.joints].index("z")
    carried = range(first, len(model.joints))
    mass = sum(model.link_masses[k] for k in carried)

    ih, ik, iz = model.joint_q_index("hip"), model.joint_q_index("knee"), model.joint_q_index("z")
    body, offset = model.contact_bodies[0], model.contact_offsets[0]

    def offset_x(hip):
        q = np.zeros(model.nq)
        q[ih], q[ik] = hip, knee
        data = forward_pass(model, q)
        foot = point_kinematics(data, body, offset).position
        com_x = sum(model.link_masses[k] * (data.p[k] + data.R[k] @ model.link_coms[k])[0] for k in carried) / mass
        return foot[0] - com_x, foot[2], q

    lo, hi = -knee / 2 - 0.5, -knee / 2 + 0.5
    f_lo = offset_x(lo)[0]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = offset_x(mid)[0]
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    _, foot_z, q = offset_x(0.5 * (lo + hi))
    q[iz] = -foot_z
    return q


def builtin_pendulum(mass: float = 1.0, length: float = 1.0) -> RobotModel:
    """Point-mass pendulum about the y axis, hanging along -z at q = 0."""
    links = [Link("bob", mass, (0.0, 0.0, -length))]
    joints = [Joint("hinge", "revolute", "world", "bob", axis=(0.0, 1.0, 0.0))]
    return RobotModel(links, joints, name="pendulum")


def builtin_slider(mass: float = 2.0, axis=(0.0, 0.0, 1.0), contact: bool = True) -> RobotModel:
    """One prismatic point mass; optionally a single-axis contact at its origin."""
    links = [Link("mass", mass)]
    joints = [Joint("slide", "prismatic", "world", "mass", axis=tuple(axis))]
    ax = "xyz"[int(np.argmax(np.abs(axis)))]
    frames = [ContactFrame("pad", "mass", axes=ax)] if contact else []
    return RobotModel(links, joints, frames, name="slider")


def builtin_arm3() -> RobotModel:
    """Fixed-base 3-DOF arm (yaw, pitch, pitch) with a tip contact frame."""
    links = [
        Link("link1", 1.0, (0.0, 0.0, 0.1), _rod_inertia(1.0, 0.2)),
        Link("link2", 1.0, (0.0, 0.0, 0.2), _rod_inertia(1.0, 0.4)),
        Link("link3", 0.5, (0.0, 0.0, 0.15), _rod_inertia(0.5, 0.3)),
    ]
    joints = [
        Joint("j1", "revolute", "world", "link1", axis=(0.0, 0.0, 1.0)),
        Joint("j2", "revolute", "link1", "link2", (0.0, 0.0, 0.2), axis=(0.0, 1.0, 0.0)),
        Joint("j3", "revolute", "link2", "link3", (0.0, 0.0, 0.4), axis=(0.0, 1.0, 0.0)),
    ]
    frames = [ContactFrame("tip", "link3", (0.0, 0.0, 0.3))]
    return RobotModel(links, joints, frames, name="arm3")
