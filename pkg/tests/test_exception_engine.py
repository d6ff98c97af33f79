import pytest

from wizdrive.exception_engine import (Daylight, EnvException, EnvKind,
                                       ExceptionError, TaskException,
                                       TaskKind, Weather, WorldCondition,
                                       apply_env, apply_task)
from wizdrive.scenario import SubgoalStatus, instantiate


def test_env_wire_round_trip(town1):
    cases = [
        EnvException(EnvKind.WEATHER_CHANGE, weather=Weather.RAIN),
        EnvException(EnvKind.TIME_OF_DAY_CHANGE, daylight=Daylight.NIGHT),
        EnvException(EnvKind.ROADBLOCK,
                     blocked_lane=town1.lanes[0].lane_id,
                     s_from=10.0, s_to=20.0),
        EnvException(EnvKind.SPAWN_OBSTACLE, obstacle="Vehicles",
                     position=(3.0, 4.0)),
    ]
    for e in cases:
        assert EnvException.from_wire(e.to_wire()) == e


def test_env_validation():
    with pytest.raises(ExceptionError):
        EnvException(EnvKind.WEATHER_CHANGE)
    with pytest.raises(ExceptionError):
        EnvException(EnvKind.ROADBLOCK, blocked_lane="L", s_from=5.0,
                     s_to=5.0)
    with pytest.raises(ExceptionError):
        EnvException(EnvKind.SPAWN_OBSTACLE, obstacle="Dragon",
                     position=(0, 0))


def test_env_fold(town1):
    w = WorldCondition()
    w = apply_env(w, EnvException(EnvKind.WEATHER_CHANGE,
                                  weather=Weather.FOG), town1)
    w = apply_env(w, EnvException(EnvKind.TIME_OF_DAY_CHANGE,
                                  daylight=Daylight.NIGHT), town1)
    lane = town1.lanes[0]
    w = apply_env(w, EnvException(EnvKind.ROADBLOCK,
                                  blocked_lane=lane.lane_id,
                                  s_from=1.0, s_to=4.0), town1)
    assert w.weather is Weather.FOG and w.daylight is Daylight.NIGHT
    assert w.blocked_lane_ids() == frozenset({lane.lane_id})
    assert w.recommended_speed_kmh() == 10


def test_roadblock_interval_validated(town1):
    lane = town1.lanes[0]
    bad = EnvException(EnvKind.ROADBLOCK, blocked_lane=lane.lane_id,
                       s_from=0.0, s_to=lane.length + 1.0)
    with pytest.raises(ExceptionError, match="outside"):
        apply_env(WorldCondition(), bad, town1)
    with pytest.raises(ExceptionError, match="unknown lane"):
        apply_env(WorldCondition(),
                  EnvException(EnvKind.ROADBLOCK, blocked_lane="nope",
                               s_from=0.0, s_to=1.0), town1)


def _scenario(town1, template1):
    return instantiate(template1, town1, seed=7)


def test_task_add(town1, template1):
    sc = _scenario(town1, template1)
    before = len(sc.subgoals)
    new, prompt = apply_task(sc, TaskException(
        TaskKind.ADD_SUBGOAL, "One more stop.", new_landmark="Shell",
        description="Fill up at Shell"), town1)
    assert len(new.subgoals) == before + 1
    assert new.subgoals[-1].landmark.name == "Shell"
    assert new.subgoals[-1].status is SubgoalStatus.PENDING
    assert new.final_destination_index == before
    assert prompt == "One more stop."


def test_task_add_capacity(town1, template1):
    sc = _scenario(town1, template1)
    e = TaskException(TaskKind.ADD_SUBGOAL, "p", new_landmark="Shell")
    while len([s for s in sc.subgoals
               if s.status is not SubgoalStatus.ABANDONED]) < 6:
        sc, _ = apply_task(sc, TaskException(
            TaskKind.ADD_SUBGOAL, "p",
            new_landmark=town1.landmarks[len(sc.subgoals)].name), town1)
    with pytest.raises(ExceptionError, match="capacity"):
        apply_task(sc, e, town1)


def test_task_change(town1, template1):
    sc = _scenario(town1, template1)
    old_desc = sc.subgoals[0].description
    new, _ = apply_task(sc, TaskException(
        TaskKind.CHANGE_SUBGOAL, "New place.", target=0,
        new_landmark="Coco"), town1)
    assert new.subgoals[0].landmark.name == "Coco"
    assert new.subgoals[0].status is SubgoalStatus.PENDING
    assert new.subgoals[0].description == old_desc


def test_task_delete_moves_final_destination(town1, template1):
    sc = _scenario(town1, template1)
    last = len(sc.subgoals) - 1
    new, _ = apply_task(sc, TaskException(
        TaskKind.DELETE_SUBGOAL, "Skip it.", target=last), town1)
    assert new.subgoals[last].status is SubgoalStatus.ABANDONED
    assert new.final_destination_index == last - 1


def test_task_target_bounds(town1, template1):
    sc = _scenario(town1, template1)
    with pytest.raises(ExceptionError, match="out of range"):
        apply_task(sc, TaskException(TaskKind.DELETE_SUBGOAL, "p",
                                     target=99), town1)


def test_task_wire_round_trip():
    e = TaskException(TaskKind.CHANGE_SUBGOAL, "Go elsewhere", target=1,
                      new_landmark="KFC", description="d")
    assert TaskException.from_wire(e.to_wire()) == e
    with pytest.raises(ExceptionError):
        TaskException(TaskKind.ADD_SUBGOAL, "")
