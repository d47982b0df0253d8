import logging

import pytest

from conftest import SETUPS
from leakvoronoi.data_io import (
    Report,
    format_dataset,
    format_setup,
    load_dataset,
    load_setup,
    parse_dataset,
    parse_report,
    parse_setup,
    register_adapter,
    report_values,
    save_dataset,
    save_report,
    save_setup,
)
from leakvoronoi.errors import FormatError
from leakvoronoi.geometry import voronoi_diagram
from leakvoronoi.synthesis import FlowModel, generate_dataset

MINIMAL = """# three connections
name = mini
[surface]
0, 0
1, 0
1, 1
0, 1
[connections]
0.2, 0.2
0.8, 0.3   # trailing comment
0.4, 0.8
"""


def test_minimal_setup_parses():
    s = parse_setup(MINIMAL)
    assert s.name == "mini" and s.k == 3
    assert tuple(s.connections[1]) == (0.8, 0.3)


def test_connection_outside_surface_rejected():
    with pytest.raises(FormatError, match="outside"):
        parse_setup(MINIMAL.replace("0.4, 0.8", "1.4, 0.8"))


def test_nonconvex_surface_rejected():
    text = MINIMAL.replace("1, 1\n", "0.5, 0.2\n")
    with pytest.raises(FormatError, match="convex"):
        parse_setup(text)


def test_setup_errors_carry_line_numbers():
    with pytest.raises(FormatError, match="line 7"):
        parse_setup(MINIMAL.replace("0, 1\n", "0, one\n"))
    with pytest.raises(FormatError, match="line 1"):
        parse_setup("[vertices]\n")


def test_wing_setup_builds_ten_cells(wing_setup):
    assert wing_setup.k == 10
    assert len(voronoi_diagram(wing_setup.connections).cells) == 10


def test_setup_round_trip(tmp_path, wing_setup):
    path = tmp_path / "s.txt"
    save_setup(wing_setup, path)
    again = load_setup(path)
    assert again == wing_setup and format_setup(again) == format_setup(wing_setup)


def test_single_row_k3_parses(square_setup):
    text = "# schema=1;k=3;provenance=original;synthetic=false\n1,1,0.5,0.5,0.1,0.2,0.3\n"
    ds = parse_dataset(text, square_setup)
    assert len(ds.single) == 1 and ds.single[0].flows == (0.1, 0.2, 0.3)


def test_missing_links_warn(square_setup, caplog):
    text = (
        "# schema=1;k=3;provenance=original;synthetic=false\n"
        "1,1,0.5,0.5,0.1,0.2,0.3\n"
        "2,2,0.5,0.5,0.6,0.6,0.1,0.2,0.3\n"
    )
    with caplog.at_level(logging.WARNING):
        ds = parse_dataset(text, square_setup)
    assert ds.missing_links() == [2]
    assert "MissingLink" in caplog.text


@pytest.mark.parametrize(
    "row,needle",
    [
        ("1,1,0.5,0.5,0.1,0.2", "expected 7 fields"),
        ("1,3,0.5,0.5,0.1,0.2,0.3", "leak count"),
        ("x,1,0.5,0.5,0.1,0.2,0.3", "integer id"),
        ("1,1,0.5,0.5,0.1,nan?,0.3", "could not convert"),
    ],
)
def test_schema_violations_report_row(square_setup, row, needle):
    text = "# schema=1;k=3;provenance=original;synthetic=false\n1,1,0.5,0.5,0.1,0.2,0.3\n" + row + "\n"
    with pytest.raises(FormatError, match="line 3") as exc:
        parse_dataset(text, square_setup)
    assert needle in str(exc.value)


def test_header_mismatch(square_setup):
    with pytest.raises(FormatError, match="k=4"):
        parse_dataset("# schema=1;k=4;provenance=original;synthetic=false\n", square_setup)
    with pytest.raises(FormatError, match="header"):
        parse_dataset("1,1,0.5,0.5,0.1,0.2,0.3\n", square_setup)


def test_dataset_round_trip(tmp_path, wing_setup):
    ds = generate_dataset(wing_setup, 40, 25, FlowModel(2.0, 0.05), seed=3)
    path = tmp_path / "d.csv"
    save_dataset(ds, path)
    again = load_dataset(path, wing_setup)
    assert again == ds
    assert format_dataset(again) == path.read_text()


def test_adapter_hook(tmp_path, square_setup):
    path = tmp_path / "x.tsv"
    path.write_text("0.5\t0.5\t0.1\t0.2\t0.9\n")

    def tsv(p, setup):
        rows = [line.split("\t") for line in p.read_text().splitlines()]
        body = "\n".join(f"{n},1," + ",".join(r) for n, r in enumerate(rows, start=1))
        return parse_dataset(f"# schema=1;k={setup.k};provenance=original;synthetic=false\n{body}\n", setup)

    register_adapter("tsv", tsv)
    ds = load_dataset(path, square_setup, fmt="tsv")
    assert ds.single[0].flows == (0.1, 0.2, 0.9)
    with pytest.raises(ValueError):
        load_dataset(path, square_setup, fmt="nope")


def test_report_render_parse(tmp_path):
    rep = Report()
    rep.add_values("run", {"predictor": "classic", "accuracy": 0.5, "synthetic": True})
    rep.add_table("matrix", ["a", "b"], [[1, 2.0], [3, 4.0]])
    text = rep.render()
    parsed = parse_report(text)
    assert report_values(parsed["run"]) == {"predictor": "classic", "accuracy": "0.500000", "synthetic": "true"}
    assert parsed["matrix"] == ["a,b", "1,2.000000", "3,4.000000"]
    save_report(rep, tmp_path / "r.txt")
    assert (tmp_path / "r.txt").read_text() == text


def test_shipped_setups_load():
    for path in SETUPS.glob("*.txt"):
        assert load_setup(path).k >= 3
