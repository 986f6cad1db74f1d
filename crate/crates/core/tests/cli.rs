use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn contentmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contentmap"))
        .args(args)
        .env("CONTENTMAP_WORKERS", "1")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn header(text: &str) -> Vec<String> {
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn partition_of_two_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("pair.tsv");
    fs::write(&net, "a\tb\n").unwrap();
    let out = dir.path().join("part.tsv");
    let report = dir.path().join("report.csv");
    let result = contentmap(&[
        "partition",
        "--network",
        path(&net),
        "--eta",
        "0",
        "--out",
        path(&out),
        "--report",
        path(&report),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap(), "a\t0\nb\t0\n");
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(header(&text), ["eta", "tau", "total", "inter", "intra", "metadata", "topological", "modules"]);
    let rows = csv_rows(&text);
    assert_eq!(rows[0][2], "1");
    assert_eq!(rows[0][7], "1");
}

#[test]
fn missing_metadata_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("pair.tsv");
    fs::write(&net, "a\tb\n").unwrap();
    let result = contentmap(&[
        "partition",
        "--network",
        path(&net),
        "--eta",
        "1",
        "--out",
        path(&dir.path().join("p.tsv")),
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("metadata"));
}

#[test]
fn bad_input_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("bad.tsv");
    fs::write(&net, "a\tb\t-3\n").unwrap();
    let result = contentmap(&["partition", "--network", path(&net), "--eta", "0", "--out", path(&dir.path().join("p"))]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn sweep_emits_one_row_per_eta() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.tsv");
    fs::write(&net, "1\t2\n2\t3\n3\t1\n3\t4\n4\t5\n5\t6\n6\t4\n").unwrap();
    let meta = dir.path().join("meta.tsv");
    fs::write(&meta, "1\tx\n2\tx\n3\ty\n4\ty\n5\tx\n6\ty\n").unwrap();
    let out = dir.path().join("sweep.csv");
    let result = contentmap(&[
        "sweep",
        "--network",
        path(&net),
        "--metadata",
        path(&meta),
        "--eta-grid",
        "0:1:0.5",
        "--out",
        path(&out),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(header(&text)[..3], ["eta", "seed", "total"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    let metadata_terms: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(metadata_terms[0] >= metadata_terms[2]);
    for row in &rows {
        let (inter, intra, topo): (f64, f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap(), row[6].parse().unwrap());
        assert!((inter + intra - topo).abs() < 1e-9);
        assert_eq!(row[9], "");
    }
}

#[test]
fn ami_matrix_is_symmetric_with_unit_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.net");
    fs::write(
        &net,
        "*Vertices 6\n1 \"a\"\n2 \"b\"\n3 \"c\"\n4 \"d\"\n5 \"e\"\n6 \"f\"\n*Edges\n1 2\n2 3\n3 1\n3 4\n4 5\n5 6\n6 4\n",
    )
    .unwrap();
    let m1 = dir.path().join("m1.tsv");
    let m2 = dir.path().join("m2.tsv");
    fs::write(&m1, "a\t0\nb\t0\nc\t0\nd\t1\ne\t1\nf\t1\n").unwrap();
    fs::write(&m2, "a\tp\nb\tq\nc\tp\nd\tq\ne\tp\nf\tq\n").unwrap();
    let out = dir.path().join("ami.csv");
    let result = contentmap(&[
        "ami-matrix",
        "--network",
        path(&net),
        "--metadata",
        &format!("blocks={}", path(&m1)),
        "--metadata",
        &format!("alt={}", path(&m2)),
        "--out",
        path(&out),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(header(&text), ["", "blocks", "alt", "c_blocks", "c_alt"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    for i in 0..4 {
        let value: f64 = rows[i][i + 1].parse().unwrap();
        assert!((value - 1.0).abs() < 1e-12);
        for j in 0..4 {
            assert_eq!(rows[i][j + 1], rows[j][i + 1]);
        }
    }
}

#[test]
fn sbm_dump_reproduces_with_partition_command() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    fs::create_dir(&dump).unwrap();
    let out = dir.path().join("sbm.csv");
    let result = contentmap(&[
        "sbm",
        "--n",
        "40",
        "--delta-grid",
        "0.3",
        "--noise-grid",
        "0.05",
        "--eta-grid",
        "1",
        "--instances",
        "1",
        "--seed",
        "5",
        "--dump",
        path(&dump),
        "--out",
        path(&out),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        header(&text),
        ["delta", "noise", "eta", "p_in", "p_out", "mean_ami", "std_ami", "mean_modules"]
    );
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    let reported: f64 = rows[0][5].parse().unwrap();

    let seeds = fs::read_to_string(dump.join("seeds.csv")).unwrap();
    let seed_rows = csv_rows(&seeds);
    let seed_header = header(&seeds);
    let column = seed_header.iter().position(|h| h == "search_seed").unwrap();
    let search_seed = &seed_rows[0][column];

    let part = dir.path().join("found.tsv");
    let result = contentmap(&[
        "partition",
        "--network",
        path(&dump.join("sbm_d0_n0_i0.tsv")),
        "--metadata",
        path(&dump.join("sbm_d0_n0_i0.meta.tsv")),
        "--eta",
        "1",
        "--seed",
        search_seed,
        "--out",
        path(&part),
        "--report",
        path(&dir.path().join("r.csv")),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    let ids: Vec<String> = fs::read_to_string(&part)
        .unwrap()
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    let found = contentmap::netcore::read_partition(&part, &ids).unwrap();
    let planted = contentmap::netcore::read_partition(&dump.join("sbm_d0_n0_i0.planted.tsv"), &ids).unwrap();
    let ami: f64 = contentmap::ami(&found, &planted).unwrap();
    assert!((ami - reported).abs() < 1e-9, "{ami} vs {reported}");
}

#[test]
fn invalid_delta_is_rejected() {
    let result = contentmap(&["sbm", "--delta-grid", "0.5", "--instances", "1"]);
    assert_eq!(result.status.code(), Some(2));
    let result = contentmap(&["sbm", "--n", "7", "--delta-grid", "0.1", "--instances", "1"]);
    assert_eq!(result.status.code(), Some(2));
}
