import json
import math
from pathlib import Path

import numpy as np
import pytest
from openpyxl import load_workbook

from Domain.RiskDomain import FitResult, GarchParams
from Enums import ExitCode, SeriesFormat
from GenericModelFunctions import save_fit_result
from main_risk import main
from utils.series_io import load_series

BUNDLED = str(Path(__file__).resolve().parent.parent / 'data' / 'synthetic_garch_t.csv')


def _section(text: str, title: str) -> list[str]:
    block = text.split(f"# {title}\n", 1)[1]
    return block.split('\n\n', 1)[0].strip().splitlines()


def test_fit_prints_four_ljung_box_rows(capsys):
    code = main(['fit', '--input', BUNDLED, '--column', 'close'])

    out = capsys.readouterr().out
    assert code == ExitCode.OK
    lines = _section(out, 'ljung_box')
    assert lines[0] == 'series,lags,statistic,pvalue'
    assert [line.split(',')[0] for line in lines[1:]] == ['R', 'R2', 'Z', 'Z2']


def test_fit_json_is_byte_identical_across_runs(tmp_path):
    first = tmp_path / 'first.json'
    second = tmp_path / 'second.json'

    assert main(['fit', '--input', BUNDLED, '--format', 'json', '--out', str(first)]) == ExitCode.OK
    assert main(['fit', '--input', BUNDLED, '--format', 'json', '--out', str(second)]) == ExitCode.OK

    assert first.read_bytes() == second.read_bytes()
    payload = json.loads(first.read_text(encoding='utf-8'))
    assert payload['fit']['n_obs'] == 3700
    assert payload['fit']['params']['nu'] == 4.0


def test_missing_input_exits_with_input_error(tmp_path, caplog):
    missing = tmp_path / 'missing.csv'

    code = main(['fit', '--input', str(missing)])

    assert code == ExitCode.INPUT_ERROR
    assert 'missing.csv' in caplog.text


def test_filter_reconstructs_returns(tmp_path):
    out = tmp_path / 'filter.json'

    code = main(['filter', '--input', BUNDLED, '--format', 'json', '--out', str(out)])

    assert code == ExitCode.OK
    payload = json.loads(out.read_text(encoding='utf-8'))
    rows = payload['series']
    assert len(rows) == len(payload['qq']) == 3700
    assert rows[0]['mu'] == 0.0
    assert all(row['return'] == pytest.approx(row['mu'] + row['sigma'] * row['z'], abs=1e-9) for row in rows)
    assert payload['forecast']['sigma_next'] > 0.0


def test_risk_report_on_bundled_data(tmp_path):
    out = tmp_path / 'risk.json'

    code = main(['risk', '--input', BUNDLED, '--format', 'json', '--out', str(out)])

    assert code == ExitCode.OK
    payload = json.loads(out.read_text(encoding='utf-8'))
    rows = payload['estimates']
    mu = payload['forecast']['mu_next']
    evt = {(r['measure'], r['horizon']): r for r in rows if r['method'] == 'evt'}
    gaussian = {(r['measure'], r['horizon']): r for r in rows if r['method'] == 'gaussian'}
    assert evt[('Q99.5', 1)]['value'] > gaussian[('Q99.5', 1)]['value']
    alpha = payload['tail']['alpha']
    for h in (2, 4, 5):
        ratio = (evt[('Q99.5', h)]['value'] + mu) / (evt[('Q99.5', 1)]['value'] + mu)
        assert ratio == pytest.approx(h ** (1.0 / alpha), rel=1e-9)
    assert {r['measure'] for r in rows} == {'P5', 'P2', 'Q95', 'Q99.5'}


def test_single_horizon_report_has_one_column(capsys):
    code = main(['risk', '--input', BUNDLED, '--horizons', '1', '--no-benchmark'])

    out = capsys.readouterr().out
    assert code == ExitCode.OK
    lines = _section(out, 'risk')
    assert lines[0] == 'measure,method,h=1'
    assert len(lines) == 1 + 4


def test_heavy_tailed_residuals_refuse_scaling(tmp_path, caplog):
    returns = tmp_path / 'cauchy.csv'
    values = np.random.default_rng(0).standard_cauchy(2000)
    returns.write_text('return\n' + '\n'.join(f"{v:.8f}" for v in values) + '\n', encoding='utf-8')
    model = save_fit_result(FitResult(params=GarchParams(phi=0.0, alpha0=1.0, alpha1=0.0, beta1=0.0), loglik=0.0,
                                      robust_se={}, converged=True, iterations=0, n_obs=2000, series_name='cauchy'),
                            tmp_path / 'iid.json')

    code = main(['risk', '--input', str(returns), '--input-format', 'return', '--model', str(model),
                 '--tail-method', 'fraction5'])

    assert code == ExitCode.SCALING_INAPPLICABLE
    assert 'alpha' in caplog.text


def test_quick_study(tmp_path):
    out = tmp_path / 'study.json'

    code = main(['study', '--quick', '--format', 'json', '--out', str(out)])

    assert code == ExitCode.OK
    payload = json.loads(out.read_text(encoding='utf-8'))
    assert len(payload['cells']) == 16
    assert payload['config']['replications'] == 2
    assert payload['config']['n'] == 500


def test_simulate_writes_a_return_file(tmp_path, capsys):
    out = tmp_path / 'sim.csv'

    code = main(['simulate', '--n', '300', '--seed', '5', '--out', str(out)])

    assert code == ExitCode.OK
    series = load_series(out, SeriesFormat.RETURN)
    assert len(series) == 300
    assert np.all(np.isfinite(series.values))


def test_backtest(tmp_path):
    out = tmp_path / 'backtest.json'

    code = main(['backtest', '--input', BUNDLED, '--quantile', '2.0', '--format', 'json', '--out', str(out)])

    payload = json.loads(out.read_text(encoding='utf-8'))
    assert code == ExitCode.OK
    assert [row['h'] for row in payload['rows']] == [1, 2, 4, 5]
    assert payload['rows'][0]['blocks'] == 3700
    assert payload['rows'][0]['expected_Q95'] == pytest.approx(185.0)


def test_xlsx_needs_an_out_path():
    assert main(['backtest', '--input', BUNDLED, '--quantile', '2.0', '--format', 'xlsx']) == ExitCode.DOMAIN_ERROR


def test_xlsx_report(tmp_path):
    out = tmp_path / 'backtest.xlsx'

    code = main(['backtest', '--input', BUNDLED, '--quantile', '2.0', '--format', 'xlsx', '--out', str(out)])

    assert code == ExitCode.OK
    sheet = load_workbook(out)['backtest']
    header = [cell.value for cell in sheet[1]]
    assert header[:3] == ['h', 'blocks', 'violations']
    assert sheet.freeze_panes == 'A2'


def test_model_round_trip_through_the_cli(tmp_path):
    model = tmp_path / 'model.json'

    assert main(['fit', '--input', BUNDLED, '--model-out', str(model)]) == ExitCode.OK
    assert main(['tail', '--input', BUNDLED, '--model', str(model), '--format', 'json',
                 '--out', str(tmp_path / 'tail.json')]) == ExitCode.OK

    tail = json.loads((tmp_path / 'tail.json').read_text(encoding='utf-8'))
    assert {row['estimate'] for row in tail['estimates']} == {'fraction1', 'fraction5', 'huisman'}
    assert all(math.isfinite(row['alpha']) for row in tail['estimates'])


@pytest.mark.slow
def test_oracle_for_both_conventions(tmp_path):
    out = tmp_path / 'oracle.json'

    code = main(['oracle', '--big-n', '1000000', '--horizons', '1', '--format', 'json', '--out', str(out)])

    payload = json.loads(out.read_text(encoding='utf-8'))
    assert code == ExitCode.OK
    assert set(payload) == {'std-t', 'raw-t'}
    assert 'error' in payload['raw-t']
    assert 'diverged' in payload['raw-t']['error']
    q95 = [t for t in payload['std-t']['targets'] if t['kind'] == 'quantile' and t['level'] == 0.95]
    assert q95[0]['value'] == pytest.approx(1.8876, rel=0.03)
