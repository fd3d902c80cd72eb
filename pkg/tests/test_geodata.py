import pytest

from accessopt.geodata import (
    Coordinate,
    DemandPoint,
    FacilitySite,
    ParseError,
    PopulationGroup,
    RoadNetwork,
    Scenario,
    SchemaError,
    ValidationError,
    generate_synthetic_scenario,
    load_scenario,
    parse_demand,
    parse_network,
    parse_sites,
    write_scenario_bundle,
)

from conftest import ELDERLY, GENERAL, random_scenario


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


NODES_OK = "node_id,lon,lat\na,118.7,32.0\nb,118.71,32.0\n"


class TestParseNetwork:
    def test_minimal(self, tmp_path):
        nodes = write(tmp_path / "n.csv", NODES_OK)
        edges = write(tmp_path / "e.csv", "from_id,to_id,length_m,bidirectional\na,b,100,1\n")
        net = parse_network(nodes, edges)
        assert len(net.nodes) == 2
        assert len(net.edges) == 1
        assert net.edges[0].length_m == 100.0

    def test_dangling_endpoint_names_id(self, tmp_path):
        nodes = write(tmp_path / "n.csv", NODES_OK)
        edges = write(tmp_path / "e.csv", "from_id,to_id,length_m,bidirectional\na,X,100,1\n")
        with pytest.raises(ValidationError, match="'X'"):
            parse_network(nodes, edges)

    def test_negative_length(self, tmp_path):
        nodes = write(tmp_path / "n.csv", NODES_OK)
        edges = write(tmp_path / "e.csv", "from_id,to_id,length_m,bidirectional\na,b,-5,1\n")
        with pytest.raises(ValidationError, match="length_m"):
            parse_network(nodes, edges)

    def test_malformed_row_reports_line(self, tmp_path):
        nodes = write(tmp_path / "n.csv", "node_id,lon,lat\na,118.7,32.0\nb,oops,32.0\n")
        edges = write(tmp_path / "e.csv", "from_id,to_id,length_m,bidirectional\n")
        with pytest.raises(ParseError, match=":3"):
            parse_network(nodes, edges)

    def test_duplicate_node_id(self, tmp_path):
        nodes = write(tmp_path / "n.csv", "node_id,lon,lat\na,118.7,32.0\na,118.8,32.0\n")
        edges = write(tmp_path / "e.csv", "from_id,to_id,length_m,bidirectional\n")
        with pytest.raises(ValidationError, match="duplicate node_id"):
            parse_network(nodes, edges)

    def test_duplicate_edge_rejected(self, tmp_path):
        nodes = write(tmp_path / "n.csv", NODES_OK)
        edges = write(
            tmp_path / "e.csv",
            "from_id,to_id,length_m,bidirectional\na,b,100,1\nb,a,90,0\n",
        )
        with pytest.raises(ValidationError, match="duplicate edge"):
            parse_network(nodes, edges)

    def test_opposed_oneways_allowed(self, tmp_path):
        nodes = write(tmp_path / "n.csv", NODES_OK)
        edges = write(
            tmp_path / "e.csv",
            "from_id,to_id,length_m,bidirectional\na,b,100,0\nb,a,90,0\n",
        )
        assert len(parse_network(nodes, edges).edges) == 2

    def test_blank_bidirectional_defaults_true(self, tmp_path):
        nodes = write(tmp_path / "n.csv", NODES_OK)
        edges = write(tmp_path / "e.csv", "from_id,to_id,length_m,bidirectional\na,b,100,\n")
        assert parse_network(nodes, edges).edges[0].bidirectional is True

    def test_missing_column(self, tmp_path):
        nodes = write(tmp_path / "n.csv", "node_id,lon\na,118.7\n")
        with pytest.raises(SchemaError, match="lat"):
            parse_network(nodes, tmp_path / "e.csv")


class TestParseDemand:
    GROUPS = (GENERAL, ELDERLY)

    def test_row_maps_population_columns(self, tmp_path):
        path = write(
            tmp_path / "d.csv",
            "demand_id,lon,lat,pop_general,pop_elderly\nd1,118.77,32.06,1000,200\n",
        )
        (d,) = parse_demand(path, self.GROUPS)
        assert d.population == {"general": 1000, "elderly": 200}
        assert d.location == Coordinate(118.77, 32.06)

    def test_header_only_gives_empty_list(self, tmp_path):
        path = write(tmp_path / "d.csv", "demand_id,lon,lat,pop_general,pop_elderly\n")
        assert parse_demand(path, self.GROUPS) == []

    def test_missing_group_column(self, tmp_path):
        path = write(tmp_path / "d.csv", "demand_id,lon,lat,pop_general\nd1,1,1,5\n")
        with pytest.raises(SchemaError, match="pop_elderly"):
            parse_demand(path, self.GROUPS)

    def test_negative_population(self, tmp_path):
        path = write(
            tmp_path / "d.csv",
            "demand_id,lon,lat,pop_general,pop_elderly\nd1,1,1,-3,0\n",
        )
        with pytest.raises(ValidationError, match="non-negative"):
            parse_demand(path, self.GROUPS)

    def test_fractional_population_rejected(self, tmp_path):
        path = write(
            tmp_path / "d.csv",
            "demand_id,lon,lat,pop_general,pop_elderly\nd1,1,1,3.5,0\n",
        )
        with pytest.raises(ParseError):
            parse_demand(path, self.GROUPS)


class TestParseSites:
    def test_blank_capacity_defaults(self, tmp_path):
        path = write(tmp_path / "s.csv", "site_id,lon,lat,status,capacity\ns1,118.7,32.0,existing,\n")
        (s,) = parse_sites(path, default_capacity=1500.0)
        assert s.capacity == 1500.0

    def test_explicit_capacity_wins(self, tmp_path):
        path = write(tmp_path / "s.csv", "site_id,lon,lat,status,capacity\ns2,118.7,32.0,candidate,800\n")
        (s,) = parse_sites(path)
        assert s.capacity == 800.0
        assert not s.existing

    def test_unknown_status(self, tmp_path):
        path = write(tmp_path / "s.csv", "site_id,lon,lat,status,capacity\ns1,118.7,32.0,open,\n")
        with pytest.raises(ValidationError, match="status"):
            parse_sites(path)


class TestTypes:
    def test_coordinate_range(self):
        with pytest.raises(ValidationError):
            Coordinate(181.0, 0.0)
        with pytest.raises(ValidationError):
            Coordinate(0.0, -91.0)

    def test_t_sigma_derived(self):
        assert GENERAL.t_sigma_min == 8.75
        assert ELDERLY.t_sigma_min == 10.0
        assert PopulationGroup("chair", 35.0, 700.0).t_sigma_min == 20.0

    def test_inert_point(self):
        d = DemandPoint("d", Coordinate(0, 0), {"general": 0})
        assert d.inert
        assert not DemandPoint("d", Coordinate(0, 0), {"general": 1}).inert

    def test_scenario_needs_content(self):
        net = RoadNetwork({"n": Coordinate(0, 0)}, ())
        site = FacilitySite("s", Coordinate(0, 0), "existing")
        with pytest.raises(ValidationError, match="demand"):
            Scenario(net, (), (site,), (GENERAL,))

    def test_scenario_rejects_undeclared_group_population(self):
        net = RoadNetwork({"n": Coordinate(0, 0)}, ())
        d = DemandPoint("d", Coordinate(0, 0), {"ghost": 5})
        site = FacilitySite("s", Coordinate(0, 0), "existing")
        with pytest.raises(ValidationError, match="ghost"):
            Scenario(net, (d,), (site,), (GENERAL,))

    def test_scenario_duplicate_ids(self):
        net = RoadNetwork({"n": Coordinate(0, 0)}, ())
        d = DemandPoint("d", Coordinate(0, 0), {"general": 5})
        site = FacilitySite("s", Coordinate(0, 0), "existing")
        with pytest.raises(ValidationError, match="duplicate"):
            Scenario(net, (d, d), (site,), (GENERAL,))


class TestRoundTrip:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_bundle_round_trip(self, tmp_path, seed):
        scenario = random_scenario(seed, two_groups=True)
        paths = write_scenario_bundle(scenario, tmp_path)
        reloaded = load_scenario(
            paths["nodes.csv"], paths["edges.csv"], paths["demand.csv"],
            paths["sites.csv"], groups=scenario.groups,
        )
        assert reloaded == scenario

    def test_serialize_parse_fixed_point(self, tmp_path):
        scenario = generate_synthetic_scenario(3, grid_rows=4, grid_cols=4,
                                               n_existing=2, n_candidate=3)
        first = write_scenario_bundle(scenario, tmp_path / "a")
        reloaded = load_scenario(
            first["nodes.csv"], first["edges.csv"], first["demand.csv"],
            first["sites.csv"], groups=scenario.groups,
        )
        second = write_scenario_bundle(reloaded, tmp_path / "b")
        for name in first:
            assert first[name].read_bytes() == second[name].read_bytes()


class TestGenerator:
    def test_same_seed_identical(self):
        assert generate_synthetic_scenario(7) == generate_synthetic_scenario(7)

    def test_different_seed_differs(self):
        assert generate_synthetic_scenario(7) != generate_synthetic_scenario(8)

    def test_site_counts(self):
        sc = generate_synthetic_scenario(
            1, grid_rows=20, grid_cols=20, n_existing=16, n_candidate=30
        )
        assert len(sc.sites) == 46
        assert len(sc.existing_site_ids) == 16
        assert len(sc.candidate_site_ids) == 30

    def test_no_candidates_is_valid(self):
        sc = generate_synthetic_scenario(1, grid_rows=5, grid_cols=5,
                                         n_existing=3, n_candidate=0)
        assert sc.candidate_site_ids == ()

    def test_too_many_sites(self):
        with pytest.raises(ValidationError, match="nodes"):
            generate_synthetic_scenario(1, grid_rows=2, grid_cols=2,
                                        n_existing=3, n_candidate=2)

    def test_grid_too_small(self):
        with pytest.raises(ValidationError, match="2x2"):
            generate_synthetic_scenario(1, grid_rows=1, grid_cols=1)

    def test_sites_on_network_nodes(self):
        sc = generate_synthetic_scenario(5, grid_rows=6, grid_cols=6,
                                         n_existing=2, n_candidate=4)
        node_coords = set(sc.network.nodes.values())
        assert all(s.location in node_coords for s in sc.sites)
        assert all(d.location in node_coords for d in sc.demands)

    def test_later_groups_are_fraction_of_first(self):
        sc = generate_synthetic_scenario(9, grid_rows=5, grid_cols=5,
                                         n_existing=1, n_candidate=2)
        for d in sc.demands:
            assert d.pop_of("elderly") <= d.pop_of("general")
