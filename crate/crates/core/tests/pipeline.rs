use decouplenet::copula::{sample_copula, CopulaSpec, Family};
use decouplenet::io::{format_csv, parse_csv, read_csv, write_csv};
use decouplenet::net::{glorot_init, Activation, NetConfig};
use decouplenet::numeric::Rng;
use decouplenet::pipeline::*;
use decouplenet::plot::{boxplot_svg, scatter_svg, ColorRule, PALETTE};
use decouplenet::Error;
use ndarray::{array, Array2};
use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};

fn tiny_model() -> DecoupleConfig {
    let mut m = DecoupleConfig {
        hidden: vec![8],
        ..DecoupleConfig::default()
    };
    m.train.n_epo = 2;
    m.train.n_bat = 100;
    m
}

fn gumbel_data(n: usize, seed: u64) -> Array2<f64> {
    let s = sample_copula(&CopulaSpec::gumbel_tau(2, 0.5).unwrap(), n, &mut Rng::new(seed)).unwrap();
    // arbitrary monotone margins; only ranks should matter
    s.into_array().mapv(|u| (u / (1.0 - u)).ln() * 3.0 + 10.0)
}

#[test]
fn candidate_grammar() {
    let set = CandidateSet::parse_list(" fit:clayton ; t4=t:d=2,nu=4,tau=0.3;; fixed=frank:d=2,tau=0.2 ").unwrap();
    let labels: Vec<&str> = set.items().iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["clayton", "t4", "fixed"]);
    assert!(matches!(set.items()[0].entry, CandidateEntry::Fit(Family::Clayton)));
    assert!(matches!(set.items()[1].entry, CandidateEntry::Fixed(CopulaSpec::StudentT { .. })));
    for bad in ["fit:nonsense", "=fit:gumbel", "x=clayton:d=2,tau=2", "true=fit:gumbel;true=fit:frank"] {
        assert!(CandidateSet::parse_list(bad).is_err(), "{bad}");
    }
    assert_eq!(set.items()[0].to_string(), "clayton=fit:clayton");
    assert_eq!(set.items()[1].to_string(), "t4=t(d=2,nu=4)");
}

#[test]
fn assess_is_reproducible_and_ranked() {
    let data = gumbel_data(200, 1);
    let cands = CandidateSet::parse_list("fit:gumbel;fit:independence;three=clayton:d=3,tau=0.4").unwrap();
    let cfg = AssessConfig {
        model: tiny_model(),
        n_gen: 300,
        seed: 9,
    };
    let a = assess(&data, &cands, &cfg).unwrap();
    let b = assess(&data, &cands, &cfg).unwrap();
    assert_eq!(a.table, b.table);
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.table.models(), [EMPIRICAL_LABEL, "gumbel", "independence"]);
    assert_eq!(a.failures.len(), 1);
    assert_eq!(a.failures[0].0, "three");
    let ranked = a.ranked();
    assert!(ranked.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(a.table.metadata.iter().any(|(k, _)| k == "fitted.gumbel"));

    let other = assess(&data, &cands, &AssessConfig { seed: 10, ..cfg.clone() }).unwrap();
    assert_ne!(a.table, other.table);
}

#[test]
fn assess_input_checks() {
    let cands = CandidateSet::parse_list("fit:gumbel").unwrap();
    let cfg = AssessConfig {
        model: tiny_model(),
        n_gen: 100,
        seed: 1,
    };
    let small = gumbel_data(MIN_ASSESS_SIZE - 1, 2);
    assert!(matches!(assess(&small, &cands, &cfg), Err(Error::Input(_))));
    let mut nan = gumbel_data(100, 3);
    nan[[5, 1]] = f64::NAN;
    assert!(matches!(assess(&nan, &cands, &cfg), Err(Error::Input(_))));
    let data = gumbel_data(100, 4);
    assert!(matches!(
        assess(&data, &cands, &AssessConfig { n_gen: 1, ..cfg }),
        Err(Error::Config(_))
    ));
}

fn study_cfg(kind: TransformKind) -> StudyConfig {
    StudyConfig {
        replications: 3,
        n_trn: 200,
        n_gen: 300,
        model: tiny_model(),
        seed: 77,
        kind,
    }
}

#[test]
fn study_grid_for_both_kinds() {
    let truth = CopulaSpec::clayton_tau(2, 0.5).unwrap();
    let cands = CandidateSet::parse_list("indep=independence:d=2;wrong=clayton:d=3,tau=0.3;fit:frank").unwrap();
    for kind in [TransformKind::Rosenblatt, TransformKind::DecoupleNet] {
        let out = simulation_study(&truth, &cands, &study_cfg(kind)).unwrap();
        assert_eq!(out.table.models(), [TRUE_LABEL, "indep", "frank"], "{kind}");
        assert_eq!(out.table.replications(), 3);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, "wrong");
        let again = simulation_study(&truth, &cands, &study_cfg(kind)).unwrap();
        assert_eq!(out.table, again.table);
        let meta = out.table.metadata_string();
        assert!(meta.contains(&format!("kind={kind}")));
    }
}

#[test]
fn study_rosenblatt_separates_independence() {
    let truth = CopulaSpec::clayton_tau(2, 0.6).unwrap();
    let cands = CandidateSet::parse_list("indep=independence:d=2").unwrap();
    let cfg = StudyConfig {
        n_gen: 2000,
        ..study_cfg(TransformKind::Rosenblatt)
    };
    let out = simulation_study(&truth, &cands, &cfg).unwrap();
    assert_eq!(out.table.best(), TRUE_LABEL);
    assert!(out.flagged.is_empty());
    for b in 0..3 {
        assert_eq!(out.table.replication_ranking(b)[0], TRUE_LABEL);
    }
}

#[test]
fn study_config_errors() {
    let truth = CopulaSpec::clayton_tau(2, 0.5).unwrap();
    let cands = CandidateSet::parse_list("fit:frank").unwrap();
    let mut cfg = study_cfg(TransformKind::DecoupleNet);
    cfg.model.train.n_bat = 150;
    assert!(matches!(simulation_study(&truth, &cands, &cfg), Err(Error::Config(_))));
    let reserved = CandidateSet::parse_list("true=fit:frank").unwrap();
    let cfg = study_cfg(TransformKind::Rosenblatt);
    assert!(matches!(simulation_study(&truth, &reserved, &cfg), Err(Error::Config(_))));
    let gumbel = CopulaSpec::gumbel_tau(2, 0.5).unwrap();
    assert!(matches!(simulation_study(&gumbel, &cands, &cfg), Err(Error::Unsupported(_))));
    let zero = StudyConfig { replications: 0, ..cfg };
    assert!(simulation_study(&truth, &cands, &zero).is_err());
    assert!("bogus".parse::<TransformKind>().is_err());
    assert_eq!("net".parse::<TransformKind>().unwrap(), TransformKind::DecoupleNet);
}

#[test]
fn score_table_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scores.csv");
    let mut t = ScoreTable::new(
        vec!["true".into(), "b".into(), "c".into()],
        vec![vec![0.1, 0.9, 0.5], vec![0.2, 0.8, 0.3], vec![0.05, 1.0, 0.4]],
    )
    .unwrap();
    t.metadata.push(("seed".into(), "3".into()));
    t.write(&path).unwrap();
    let back = ScoreTable::read(&path).unwrap();
    assert_eq!(back.models(), t.models());
    for b in 0..3 {
        assert_eq!(back.row(b), t.row(b));
    }
    let meta = std::fs::read_to_string(ScoreTable::sidecar_path(&path)).unwrap();
    assert_eq!(meta, "seed=3\n");
    assert_eq!(t.medians(), vec![0.1, 0.9, 0.4]);
    assert_eq!(t.ranking(), ["true", "c", "b"]);
    assert_eq!(t.score(1, "c"), Some(0.3));
    assert_eq!(t.score(1, "zzz"), None);

    assert!(ScoreTable::new(vec!["a".into()], vec![vec![-1.0]]).is_err());
    assert!(ScoreTable::new(vec!["a".into()], vec![vec![0.1, 0.2]]).is_err());
    for bad in [
        "",
        "rep,model,score\n1,a,0.1\n",
        "replication,model,score\n0,a,0.1\n",
        "replication,model,score\n1,a,x\n",
        "replication,model,score\n1,a,0.1\n1,a,0.2\n",
    ] {
        assert!(matches!(ScoreTable::from_csv_str(bad), Err(Error::Input(_))), "{bad:?}");
    }
    assert!(matches!(ScoreTable::read(&dir.path().join("missing.csv")), Err(Error::Io { .. })));
}

#[test]
fn network_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = NetConfig::new(3, 2).with_hidden(vec![7, 5], Activation::Tanh);
    let net = glorot_init(&cfg, &mut Rng::new(5)).unwrap();
    let path = dir.path().join("net.txt");
    save_net(&net, &path).unwrap();
    let back = load_net(&path).unwrap();
    assert_eq!(back, net);
    assert_eq!(net_to_string(&back), std::fs::read_to_string(&path).unwrap());

    let text = net_to_string(&net);
    let truncated: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
    let corrupt = [
        String::new(),
        text.replacen(NET_MAGIC, "SOMETHING ELSE", 1),
        truncated,
        text.replacen("3 2 7,5", "3 2 7,x", 1),
        text.replacen("3 2 7,5", "1 2 7,5", 1),
        format!("{text}1 2 3\n"),
    ];
    for c in &corrupt {
        assert!(matches!(net_from_str(c), Err(Error::Format(_))), "{c:.40}");
    }
}

#[test]
fn csv_reader_rules() {
    let x = parse_csv("a,b\n1,2\n\n3.5,-4e-3\n").unwrap();
    assert_eq!(x, array![[1.0, 2.0], [3.5, -4e-3]]);
    assert_eq!(parse_csv("1,2\n3,4\n").unwrap().nrows(), 2);
    for bad in ["", "a,b\n", "1,2\n3\n", "1,2\n3,oops\n"] {
        assert!(matches!(parse_csv(bad), Err(Error::Input(_))), "{bad:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "1,2\n3,x\n").unwrap();
    match read_csv(&path) {
        Err(Error::Input(msg)) => assert!(msg.contains("x.csv") && msg.contains("row 2"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(read_csv(&dir.path().join("none.csv")), Err(Error::Io { .. })));
}

fn parse_svg(text: &str) -> roxmltree::Document<'_> {
    roxmltree::Document::parse(text).unwrap_or_else(|e| panic!("malformed SVG: {e}"))
}

#[test]
fn scatter_svg_is_well_formed() {
    let pts = sample_copula(&CopulaSpec::clayton_tau(2, 0.5).unwrap(), 250, &mut Rng::new(6)).unwrap();
    let colors = ColorRule::MeanOfCoordinates.colors(pts.view());
    let svg = scatter_svg(pts.view(), Some(&colors), "a <title> & \"quotes\"").unwrap();
    assert_eq!(svg, scatter_svg(pts.view(), Some(&colors), "a <title> & \"quotes\"").unwrap());
    let doc = parse_svg(&svg);
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let dots: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("pt")).collect();
    assert_eq!(dots.len(), 250);
    assert!(dots.iter().all(|n| PALETTE.contains(&n.attribute("fill").unwrap())));
    let title = doc.descendants().find(|n| n.has_tag_name("title")).unwrap();
    assert_eq!(title.text(), Some("a <title> & \"quotes\""));

    let three = Array2::from_elem((4, 3), 0.5);
    assert!(matches!(scatter_svg(three.view(), None, "x"), Err(Error::Config(_))));
    assert!(matches!(scatter_svg(pts.view(), Some(&colors[..3]), "x"), Err(Error::Shape(_))));
}

#[test]
fn boxplot_svg_is_well_formed() {
    let t = ScoreTable::new(
        vec!["true".into(), "a&b".into()],
        vec![vec![0.1, 0.5], vec![0.2, 0.6], vec![0.15, 9.0], vec![0.12, 0.55], vec![0.11, 0.52]],
    )
    .unwrap();
    let svg = boxplot_svg(&t, "scores").unwrap();
    let doc = parse_svg(&svg);
    let groups: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("model")).collect();
    let names: Vec<&str> = groups.iter().map(|g| g.attribute("data-model").unwrap()).collect();
    assert_eq!(names, ["true", "a&b"]);
    let medians: Vec<f64> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("median"))
        .map(|n| n.attribute("data-value").unwrap().parse().unwrap())
        .collect();
    assert_eq!(medians, t.medians());
    // 9.0 lies far outside the whiskers of the second model
    let outliers = doc.descendants().filter(|n| n.attribute("class") == Some("outlier")).count();
    assert_eq!(outliers, 1);
}

#[test]
fn color_rules_parse() {
    assert_eq!("mean".parse::<ColorRule>().unwrap(), ColorRule::MeanOfCoordinates);
    assert_eq!("corner:0.2".parse::<ColorRule>().unwrap(), ColorRule::CornerBoxes { threshold: 0.2 });
    for bad in ["", "corner:0", "corner:x", "median"] {
        assert!(bad.parse::<ColorRule>().is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn csv_text_round_trips_exactly(seed in 0u64..10_000, n in 1usize..30, d in 1usize..5) {
        let mut rng = Rng::new(seed);
        let x = Array2::from_shape_simple_fn((n, d), || (rng.normal() * 1e3).powi(3) * rng.uniform());
        let header: Vec<String> = (0..d).map(|j| format!("c{j}")).collect();
        prop_assert_eq!(parse_csv(&format_csv(x.view(), Some(&header))).unwrap(), x.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_csv(x.view(), None, &path).unwrap();
        prop_assert_eq!(read_csv(&path).unwrap(), x);
    }

    #[test]
    fn score_csv_round_trips(seed in 0u64..10_000, b in 1usize..8, k in 1usize..6) {
        let mut rng = Rng::new(seed);
        let models: Vec<String> = (0..k).map(|j| format!("m{j},\"x\"")).collect();
        let rows: Vec<Vec<f64>> = (0..b).map(|_| (0..k).map(|_| rng.uniform() * 10.0).collect()).collect();
        let t = ScoreTable::new(models, rows).unwrap();
        let back = ScoreTable::from_csv_str(&t.to_csv_string().unwrap()).unwrap();
        prop_assert_eq!(back.models(), t.models());
        for r in 0..b {
            prop_assert_eq!(back.row(r), t.row(r));
        }
        let ranking = t.ranking();
        let med = t.medians();
        let pos = |m: &str| t.models().iter().position(|x| x == m).unwrap();
        prop_assert!(ranking.windows(2).all(|w| med[pos(&w[0])] <= med[pos(&w[1])]));
        prop_assert_eq!(t.best(), ranking[0].as_str());
    }

    #[test]
    fn batch_size_divides(n in 1usize..5000, target in 1usize..1500) {
        let b = batch_size_for(n, target);
        prop_assert!(b >= 1 && b <= target.max(1) && n % b == 0);
        prop_assert!((b + 1..=target.min(n)).all(|c| n % c != 0));
    }

    #[test]
    fn median_between_extremes(v in proptest::collection::vec(0.0f64..100.0, 1..50)) {
        let m = median(&v);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo && m <= hi);
        prop_assert_eq!(quantile(&v, 0.0), lo);
        prop_assert_eq!(quantile(&v, 1.0), hi);
    }
}
