"""
GREA 관리 명령 공통 부분

stdout 에는 기계가 읽는 출력(JSON/JSONL/CSV)만, 사람용 로그는 stderr 로 보낸다.
종료 코드: 0 정상, 1 사용법/입출력, 2 수치 오류로 중단, 3 자체 검사 실패
"""
import logging
import sys

from django.core.management import BaseCommand, CommandError
from django.core.management.base import CommandParser

from apps.common.exceptions import ConfigError, GreaError, NumericalError, SelfCheckError
from apps.common.utils import dump_json

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_SELF_CHECK = 3


def exit_code_for(error: Exception) -> int:
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(error, SelfCheckError):
        return EXIT_SELF_CHECK
    return EXIT_USAGE


def parse_int_list(text: str, name: str):
    """쉼표로 구분된 정수 목록 (예: 8,32,128)"""
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{name} must be comma separated integers, got {text!r}")
    if not values:
        raise ConfigError(f"{name} is empty")
    return values


class GreaParser(CommandParser):
    """인자 오류도 종료 코드 1 (argparse 기본값 2 는 수치 오류 코드와 겹친다)"""

    def error(self, message):
        if self.called_from_command_line:
            self.print_usage(sys.stderr)
            self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")
        raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)


class GreaCommand(BaseCommand):
    """하위 클래스는 run(**options) 를 구현한다."""

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.__class__ = GreaParser
        return parser

    def add_seed_argument(self, parser):
        parser.add_argument("--seed", type=int, default=None, help="설정 파일 seed 와 GREA_SEED 보다 우선")

    def add_set_argument(self, parser):
        parser.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="설정 키 덮어쓰기 (여러 번 가능, 예: --set alpha=0 --set synthetic.num_graphs=50)",
        )

    def emit_json(self, obj) -> None:
        self.stdout.write(dump_json(obj))

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except GreaError as e:
            logger.error("%s failed: %s", self.__module__.rsplit(".", 1)[-1], e)
            raise CommandError(str(e), returncode=exit_code_for(e))
        except OSError as e:
            raise CommandError(f"{getattr(e, 'filename', '') or ''} {e.strerror or e}".strip(),
                               returncode=EXIT_USAGE)

    def run(self, **options):
        raise NotImplementedError
