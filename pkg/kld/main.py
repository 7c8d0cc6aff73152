"""
kld command line: generate -> detect -> evaluate, plus the alpha sweep
"""

import logging
import sys

import click

from kld import __version__
from kld.errors import EXIT_DATA, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, KLDError
from kld.routes.detect import detect_cmd
from kld.routes.evaluate import evaluate_cmd
from kld.routes.generate import generate_cmd
from kld.routes.sweep import sweep_cmd

logger = logging.getLogger("kld")

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class KLDGroup(click.Group):
    """Click group mapping errors to the kld exit codes"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except KLDError as e:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_DATA)
        except AssertionError as e:
            logger.error("Internal invariant violated", exc_info=True)
            click.echo(f"Internal error: {e}", err=True)
            sys.exit(EXIT_INVARIANT)

        if not standalone_mode:
            return rv
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


@click.group(cls=KLDGroup)
@click.version_option(__version__, prog_name="kld")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.option("-q", "--quiet", is_flag=True, help="Warnings and errors only.")
def cli(verbose, quiet):
    """KL-divergence concept drift detection for labeled data streams."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


# command modules
cli.add_command(generate_cmd)
cli.add_command(detect_cmd)
cli.add_command(evaluate_cmd)
cli.add_command(sweep_cmd)


def main():
    cli()


if __name__ == "__main__":
    main()
