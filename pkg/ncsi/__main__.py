import importlib.metadata
import sys
from typing import Optional, Sequence

import click

from ncsi.commands.capacity import capacity
from ncsi.commands.compare import compare
from ncsi.commands.info import info
from ncsi.commands.region import region
from ncsi.commands.relay import relay
from ncsi.commands.simulate import simulate
from ncsi.misc import ChannelSpecError, NcsiError

try:
    version = importlib.metadata.version("ncsi-bounds")
except importlib.metadata.PackageNotFoundError:
    version = "0.0.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SPEC = 2


@click.group(
    help=f"ncsi ({version}) -- capacity expressions and rate regions of channels with non-causal state information at the transmitters"
)
@click.version_option(version)
def cli():
    pass


cli.add_command(info)
cli.add_command(capacity)
cli.add_command(region)
cli.add_command(compare)
cli.add_command(relay)
cli.add_command(simulate)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and map the outcome to an exit code."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="ncsi", standalone_mode=False)
    except ChannelSpecError as e:
        where = "" if e.row is None else f" (row {e.row})"
        click.echo(f"Error: invalid channel spec{where}: {e}", err=True)
        return EXIT_SPEC
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except NcsiError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
