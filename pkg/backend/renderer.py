from shared.models import Observation


def status_line(obs: Observation) -> str:
    stats = obs.blstats
    pray = '-' if stats.last_prayer_turn is None else stats.last_prayer_turn
    return (f"HP:{stats.hp}({stats.max_hp}) Hunger:{stats.hunger_name} Dlvl:{stats.depth} "
            f"$:{stats.gold} T:{stats.turn} S:{stats.score} Pos:{stats.pos[0]},{stats.pos[1]} "
            f"Pray:{pray}")


def render_ascii(obs: Observation) -> str:
    """Message line, the map rows, then the status line"""
    rows = [''.join(chr(code) for code in row) for row in obs.chars]
    return '\n'.join([obs.message] + rows + [status_line(obs)])
