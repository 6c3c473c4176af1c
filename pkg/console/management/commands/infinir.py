import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from common.exceptions import InfinirError
from compression import serializers as ored_serializers
from console import services
from console.workspace import load_workspace
from proofs import serializers as certificates
from relations.search import SearchBudget
from relations.universe import RelationKind
from terms.syntax import render_finite

logger = logging.getLogger('console')

RELATIONS = [kind.value for kind in RelationKind]


class Command(BaseCommand):
    help = 'Check, prove, verify and compress infinitary rewriting and equational judgments'

    def add_arguments(self, parser):
        actions = parser.add_subparsers(dest='action', required=True)

        for name, text in (
            ('check', 'Answer a judgment: exactly on a closed universe, otherwise by search'),
            ('prove', 'Like check, but write the certificate document'),
        ):
            sub = actions.add_parser(name, help=text)
            self._trs_argument(sub)
            self._goal_arguments(sub)
            self._budget_arguments(sub)
            self._output_arguments(sub)

        sub = actions.add_parser('verify', help='Validate a certificate document against the rules')
        self._trs_argument(sub)
        sub.add_argument('certificate', help='Certificate JSON file')

        sub = actions.add_parser('compress', help='Compress a rewriting certificate level by level')
        self._trs_argument(sub)
        sub.add_argument('certificate', nargs='?', help='Certificate JSON file (searched from --from/--to when omitted)')
        self._goal_arguments(sub, required=False)
        self._budget_arguments(sub)
        self._output_arguments(sub)
        sub.add_argument('--steps', type=int, help='Print the first K steps as "position  rule  result-term" lines')
        sub.add_argument('--depth', type=int, help='Levels re-checked against the target (default ORED_CHECK_DEPTH)')

        sub = actions.add_parser('unfold', help='Print the truncation of a term at a depth')
        self._trs_argument(sub)
        sub.add_argument('term', help='Term expression or named term')
        sub.add_argument('--depth', type=int, default=4, help='Truncation depth (default 4)')

        sub = actions.add_parser('distance', help='Print the distance between two terms')
        self._trs_argument(sub)
        sub.add_argument('left', help='Term expression or named term')
        sub.add_argument('right', help='Term expression or named term')

        sub = actions.add_parser('export_dot', help='Render a certificate document as Graphviz')
        self._trs_argument(sub)
        sub.add_argument('certificate', help='Certificate JSON file')
        sub.add_argument('--emit', help='Write the output to this path instead of stdout')

    def _trs_argument(self, parser):
        parser.add_argument('trs', help='TRS file with rules or equations and named terms')

    def _goal_arguments(self, parser, required=True):
        parser.add_argument('--rel', choices=RELATIONS, default='ired' if not required else None,
                            required=required, help='Relation to check')
        parser.add_argument('--from', dest='source', required=required, help='Source term expression or name')
        parser.add_argument('--to', dest='target', required=required, help='Target term expression or name')

    def _budget_arguments(self, parser):
        parser.add_argument('--budget-goals', type=int, help='Search: maximum number of certificate goals')
        parser.add_argument('--budget-split', type=int, help='Search: maximum items before the final lift')
        parser.add_argument('--budget-nodes', type=int, help='Search: maximum number of candidate terms')
        parser.add_argument('--universe-budget', type=int, help='Exact solver: maximum universe size')

    def _output_arguments(self, parser):
        parser.add_argument('--format', choices=['json', 'dot', 'text'], default='json', help='Output format')
        parser.add_argument('--emit', help='Write the document to this path instead of stdout')

    def handle(self, *args, **options):
        action = options['action']
        try:
            code = getattr(self, f'handle_{action}')(options)
        except InfinirError as exc:
            logger.exception("infinir %s failed", action)
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=3)
        except OSError as exc:
            logger.exception("infinir %s could not read or write a file", action)
            raise CommandError(str(exc), returncode=3)
        if code:
            raise SystemExit(code)

    # ---------- helpers ----------

    def _budget(self, options):
        return SearchBudget.from_settings(
            max_goals=options.get('budget_goals'),
            max_split=options.get('budget_split'),
            max_new_term_nodes=options.get('budget_nodes'),
        )

    def _goal(self, ws, options):
        kind = RelationKind(options['rel'])
        return kind, ws.resolve(options['source']), ws.resolve(options['target'])

    def _emit(self, text, options):
        if options.get('emit'):
            Path(options['emit']).write_text(text + '\n', encoding='utf-8')
        else:
            self.stdout.write(text)

    def _certificate_text(self, p, fmt):
        if fmt == 'dot':
            return services.export_dot(p)
        if fmt == 'text':
            return '\n'.join(
                f"{i}: {node} [{node.rule.name}] -> {', '.join(map(str, node.successors())) or '-'}"
                for i, node in enumerate(p.nodes)
            )
        return certificates.dump(p)

    # ---------- actions ----------

    def handle_check(self, options):
        ws = load_workspace(options['trs'])
        kind, s, t = self._goal(ws, options)
        verdict = services.run_check(ws, kind, s, t, self._budget(options), options.get('universe_budget'))
        if options['format'] == 'json':
            size = len(verdict.universe) if verdict.universe is not None else None
            self._emit(json.dumps({'outcome': verdict.outcome.value, 'via': verdict.via, 'universe': size}), options)
        else:
            self._emit(f"{verdict.outcome.value} ({verdict.via})", options)
        return verdict.exit_code

    def handle_prove(self, options):
        ws = load_workspace(options['trs'])
        kind, s, t = self._goal(ws, options)
        verdict = services.run_prove(ws, kind, s, t, self._budget(options), options.get('universe_budget'))
        if verdict.certificate is not None:
            self._emit(self._certificate_text(verdict.certificate, options['format']), options)
        else:
            self.stderr.write(f"{verdict.outcome.value}: no certificate for {s} {kind.value} {t}")
        return verdict.exit_code

    def handle_verify(self, options):
        ws = load_workspace(options['trs'])
        report = services.run_verify(ws, Path(options['certificate']).read_text(encoding='utf-8'))
        if report.ok:
            self.stdout.write(self.style.SUCCESS('ok'))
            return 0
        for violation in report.violations:
            self.stdout.write(str(violation))
        return 1

    def handle_compress(self, options):
        ws = load_workspace(options['trs'])
        if options.get('certificate'):
            document = Path(options['certificate']).read_text(encoding='utf-8')
        else:
            if not (options.get('source') and options.get('target')):
                raise CommandError('compress needs a certificate file or --from and --to', returncode=3)
            kind, s, t = self._goal(ws, options)
            verdict = services.run_prove(ws, kind, s, t, self._budget(options), options.get('universe_budget'))
            if verdict.certificate is None:
                self.stderr.write(f"{verdict.outcome.value}: no certificate for {s} {kind.value} {t}")
                return verdict.exit_code
            document = certificates.dump(verdict.certificate)
        o = services.run_compress(ws, document)
        report = services.run_validate_ored(ws, o, options.get('depth'))
        if not report.ok:
            for violation in report.violations:
                self.stderr.write(str(violation))
            return 1
        if options.get('steps') is not None:
            rows = services.run_emit(ws, o, options['steps'])
            self._emit('\n'.join(f"{position}  {rule}  {result}" for position, rule, result in rows), options)
        else:
            self._emit(ored_serializers.dump(o), options)
        return 0

    def handle_unfold(self, options):
        ws = load_workspace(options['trs'])
        self.stdout.write(render_finite(services.run_unfold(ws, ws.resolve(options['term']), options['depth'])))
        return 0

    def handle_distance(self, options):
        ws = load_workspace(options['trs'])
        self.stdout.write(str(services.run_distance(ws, ws.resolve(options['left']), ws.resolve(options['right']))))
        return 0

    def handle_export_dot(self, options):
        load_workspace(options['trs'])
        p = certificates.load(Path(options['certificate']).read_text(encoding='utf-8'))
        self._emit(services.export_dot(p), options)
        return 0
