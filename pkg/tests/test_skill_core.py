from dataclasses import replace

import pytest

from backend.game_whisperer import GameState, refine
from backend.level_generator import level_from_ascii
from backend.rogue_env import RogueEnv
from backend.skill_core import (
    EnvironmentHandle, SafetyMonitor, Skill, SkillRegistry, plan_next, random_legal_move,
    register_skill, run_episode,
)
from backend.skills import FightSkill, GoldSkill, SkillParams, build_default_registry
from shared.constants import Action, EndReason, MOVES, OutcomeStatus, TaskKind
from shared.exceptions import DuplicateName, UnknownSkill
from shared.models import Outcome, Plan, TaskSpec
from shared.seeding import rng_stream


def begin(rows, kind=TaskKind.FULL_GAME, rooms=None, seed=0):
    env = RogueEnv()
    levels = 2 if kind == TaskKind.FULL_GAME else 1
    task = TaskSpec(kind, max_steps=500, seed=seed, levels=levels)
    state = refine(GameState.empty(), env.reset(task, level=level_from_ascii(rows, rooms=rooms)))
    return EnvironmentHandle(env, state, rng_stream(seed, 'agent'))


class WaitSkill(Skill):
    name = 'Wait'

    def _plan(self, state):
        return Plan(self.name)

    def execute(self, plan, handle):
        handle.act(Action.WAIT)
        return Outcome(OutcomeStatus.COMPLETED, 1)


def test_register_then_resolve():
    fight = FightSkill(SkillParams())
    registry = register_skill(fight)

    assert registry.resolve('Fight') is fight
    assert 'Fight' in registry


def test_register_twice_is_rejected():
    registry = SkillRegistry([FightSkill(SkillParams())])
    with pytest.raises(DuplicateName):
        registry.register(FightSkill(SkillParams()))


def test_default_registry_holds_every_skill():
    names = build_default_registry().names()

    assert len(names) == len(set(names)) == 17
    assert {'NeuralWalk', 'BCWalk', 'RandomWalk', 'Pray'} <= set(names)


def test_unknown_priority_name():
    handle = begin(['-----', '-.@.-', '-----'])
    with pytest.raises(UnknownSkill):
        plan_next(handle.state, ['Fly'], build_default_registry())


def test_first_plannable_skill_wins():
    handle = begin(['--------', '-.@.$.>-', '--------'])
    registry = build_default_registry()

    skill, plan = plan_next(handle.state, ['Pray', 'Gold', 'StairsDescend'], registry)
    assert skill.name == 'Gold'
    assert plan.target == (1, 4)
    assert plan.path.steps[0] == handle.state.position

    skill, _ = plan_next(handle.state, ['StairsDescend', 'Gold'], registry)
    assert skill.name == 'StairsDescend'


def test_nothing_plannable():
    handle = begin(['-----', '-.@.-', '-----'])
    assert plan_next(handle.state, ['Pray', 'Fight', 'Gold'], build_default_registry()) is None


def test_custom_skill_takes_part_in_planning():
    registry = build_default_registry().register(WaitSkill())
    handle = begin(['-----', '-.@.-', '-----'])

    skill, _ = plan_next(handle.state, ['Gold', 'Wait', 'RandomWalk'], registry)
    assert skill.name == 'Wait'


def test_planning_leaves_the_environment_alone(full_task):
    env = RogueEnv()
    state = refine(GameState.empty(), env.reset(full_task))
    position, hp = env.position, env.hp
    registry = build_default_registry()

    for name in registry.names():
        registry.resolve(name).plan(state)

    assert env.actions == 0
    assert env.turn == 0
    assert (env.position, env.hp) == (position, hp)


def test_reach_skill_opens_closed_doors():
    handle = begin(['-------', '-.@+.$-', '-------'])
    skill = GoldSkill(SkillParams())
    plan = skill.plan(handle.state)

    outcome = skill.execute(plan, handle)

    assert outcome == Outcome(OutcomeStatus.COMPLETED, 5)
    assert handle.env.counters.gold == 10


def test_door_pair_never_overruns_the_action_cap():
    handle = begin(['-------', '-.@.+$-', '-------'])
    skill = GoldSkill(SkillParams(max_plan_actions=2))
    plan = skill.plan(handle.state)

    outcome = skill.execute(plan, handle)

    assert outcome == Outcome(OutcomeStatus.INTERRUPTED, 1)
    assert handle.env.position == (1, 3)


def test_safety_monitor_sees_new_neighbours_and_hp_drops():
    calm = begin(['-------', '-.@..j-', '-------']).state
    crowded = begin(['-------', '-.@j..-', '-------']).state
    monitor = SafetyMonitor(calm)

    assert monitor.triggered(crowded)
    assert not monitor.triggered(calm)
    hurt = replace(calm, blstats=replace(calm.blstats, hp=13))
    assert monitor.triggered(hurt)


def test_random_legal_move_stays_on_known_floor():
    handle = begin(['-----', '-.@--', '-----'])
    assert random_legal_move(handle.state, rng_stream(1, 'agent')) == Action.W


@pytest.mark.parametrize('keys', [('message',), ('language',)])
def test_fallback_moves_without_a_position(room_task, keys):
    stats = run_episode(room_task, ['ExploreClosest'], 100, build_default_registry(), keys=keys)

    assert stats.end_reason in (EndReason.FAILED, EndReason.GOAL)
    assert stats.actions > 0


def test_random_legal_move_without_a_position():
    state = GameState.empty()
    assert state.position is None
    assert random_legal_move(state, rng_stream(1, 'agent')) in MOVES


def test_max_steps_must_be_positive(room_task):
    with pytest.raises(ValueError):
        run_episode(room_task, ['ExploreClosest'], 0, build_default_registry())


@pytest.mark.parametrize('seed', range(10))
def test_room_is_solved_by_exploration(seed):
    task = TaskSpec(TaskKind.ROOM_5X5, max_steps=100, seed=seed)
    stats = run_episode(task, ['ExploreClosest', 'Unseen', 'Horizon'], 100, build_default_registry())

    assert stats.end_reason == EndReason.GOAL
    assert stats.turns <= 99


def test_same_seed_gives_same_stats(full_task):
    priorities = ['Pray', 'Fight', 'Gold', 'StairsDescend', 'ExploreClosest', 'Unseen', 'RandomWalk']
    first = run_episode(full_task, priorities, 300, build_default_registry())
    second = run_episode(full_task, priorities, 300, build_default_registry())

    assert first == second
    assert first.turns <= 300


def test_fallback_gives_up_when_nothing_plans(open_room):
    task = TaskSpec(TaskKind.FULL_GAME, max_steps=500, levels=2)
    stats = run_episode(task, ['Pray'], 500, build_default_registry(), level=open_room)

    assert stats.end_reason == EndReason.FAILED
    assert stats.actions == 50
    assert stats.skill_counts == {}


def test_observers_see_every_action(open_room):
    seen = []
    task = TaskSpec(TaskKind.FULL_GAME, max_steps=30, levels=2)
    stats = run_episode(task, ['RandomWalk'], 30, build_default_registry(), level=open_room,
                        observers=[lambda state, action, payload, result, consumed:
                                   seen.append((action, consumed))])

    assert stats.end_reason == EndReason.STEP_LIMIT
    assert len(seen) == stats.actions
    assert sum(consumed for _, consumed in seen) == stats.turns
