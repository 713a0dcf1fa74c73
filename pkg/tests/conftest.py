from __future__ import annotations

from pathlib import Path

import pytest

from skillforge import (
    base_graph,
    build_query,
    infer_graph,
    load_kb,
    reference_kb_path,
)

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"

MARKING_ELEMENTS = ("dashed_lane_marking", "solid_lane_marking")

BASE_SKILLS = frozenset({
    "lane_keeping",
    "plan_trajectory",
    "perceive_lane_course",
    "estimate_lane_relative_position_orientation",
    "estimate_pose",
    "estimate_vehicle_motion",
    "evaluate_digital_map_data",
    "evaluate_imaging_sensor_data",
    "evaluate_motion_sensor_data",
    "control_lateral_motion",
    "control_course_angle",
    "control_steering_system",
    "control_powertrain",
    "control_brake_system",
})

MARKING_SKILLS = frozenset({
    "perceive_lane_markings",
    "perceive_solid_lane_markings",
    "perceive_dashed_lane_markings",
})


@pytest.fixture(scope="session")
def kb():
    return load_kb(reference_kb_path())


@pytest.fixture(scope="session")
def lane_keeping_base(kb):
    return base_graph(kb, "lane_keeping")


@pytest.fixture(scope="session")
def markings_query(kb):
    return build_query(kb, "lane_keeping", "urban", MARKING_ELEMENTS)


@pytest.fixture(scope="session")
def markings_result(kb, markings_query):
    return infer_graph(kb, markings_query)


@pytest.fixture(scope="session")
def markings_graph(markings_result):
    return markings_result[0]


@pytest.fixture(scope="session")
def markings_trace(markings_result):
    return markings_result[1]
