import pytest

from pyDecEnergy.report.EvaluationReport import EvaluationReport, ReportRow


@pytest.fixture
def conv8_report():
    # Mean estimation errors of models trained on Conventional8
    report = EvaluationReport('Conventional8', provenance={'seed': 0})
    for setup, fa, fu, cross in [('Fisheye', 0.0648, 0.0388, False),
                                 ('360D8', 0.0418, 0.0258, False),
                                 ('HDR8', 0.0434, 0.0386, False),
                                 ('Conventional10', 0.3595, 0.3581, True)]:
        report.add_row(ReportRow(setup, 'FA', fa, cross))
        report.add_row(ReportRow(setup, 'FU', fu, cross))
    return report


class TestEvaluationReport:

    def test_cells(self, conv8_report):
        assert len(conv8_report) == 8
        assert conv8_report.columns == ['FA', 'FU']
        assert conv8_report.validation_setups == ['Fisheye', '360D8', 'HDR8', 'Conventional10']
        assert conv8_report.cell('HDR8', 'FU') == 0.0386
        assert conv8_report.get_row('Conventional10', 'FA').cross_bit_depth
        assert conv8_report.get_row('Fisheye', 'FX') is None
        assert conv8_report.provenance == {'seed': 0}

    def test_missing_cell(self, conv8_report):
        with pytest.raises(KeyError):
            conv8_report.cell('HDR10', 'FU')

    def test_duplicate_cell(self, conv8_report):
        with pytest.raises(ValueError):
            conv8_report.add_row(ReportRow('Fisheye', 'FU', 0.05))

    def test_negative_error(self, conv8_report):
        with pytest.raises(ValueError):
            conv8_report.add_row(ReportRow('HDR10', 'FU', -0.01))

    def test_to_dataframe(self, conv8_report):
        df = conv8_report.to_dataframe()
        assert list(df.columns) == ['training_setup', 'validation_setup', 'column', 'mean_error',
                                    'mean_error_percent', 'cross_bit_depth']
        assert len(df) == 8
        assert df['mean_error_percent'].iloc[0] == pytest.approx(6.48)

    def test_csv(self, conv8_report):
        lines = conv8_report.to_csv(provenance=['rerun with seed 0']).splitlines()
        assert lines[0] == '# rerun with seed 0'
        assert lines[1] == 'training_setup,validation_setup,column,mean_error,mean_error_percent,cross_bit_depth'
        assert lines[2] == 'Conventional8,Fisheye,FA,0.0648,6.48,false'
        assert lines[-1] == 'Conventional8,Conventional10,FU,0.3581,35.81,true'

    def test_csv_round_trip(self, conv8_report, tmp_path):
        conv8_report.write_csv(tmp_path / 'report.csv', provenance=['test'])
        reports = EvaluationReport.read_csv(tmp_path / 'report.csv')

        assert len(reports) == 1
        other = reports[0]
        assert other.training_setup == 'Conventional8'
        assert other.rows == conv8_report.rows

    def test_csv_several_trainings(self, conv8_report, tmp_path):
        conv10 = EvaluationReport('Conventional10', rows=[ReportRow('HDR10', 'FU', 0.028)])
        (tmp_path / 'report.csv').write_text(conv8_report.to_csv() + ''.join(conv10.to_csv().splitlines(True)[1:]))

        reports = EvaluationReport.read_csv(tmp_path / 'report.csv')
        assert [rr.training_setup for rr in reports] == ['Conventional8', 'Conventional10']
        assert reports[1].cell('HDR10', 'FU') == 0.028
