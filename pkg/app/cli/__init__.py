"""Command-line subcommands."""

from app.cli.feasibility_command import FeasibilityCommand
from app.cli.gate_command import GateCommand
from app.cli.geometry_command import GeometryCommand
from app.cli.protocol_command import ProtocolCommand
from app.cli.stability_command import StabilityCommand
from app.cli.transport_command import TransportCommand

COMMANDS = {
    command.name: command
    for command in (
        FeasibilityCommand,
        GateCommand,
        TransportCommand,
        ProtocolCommand,
        GeometryCommand,
        StabilityCommand,
    )
}

__all__ = ["COMMANDS"]
