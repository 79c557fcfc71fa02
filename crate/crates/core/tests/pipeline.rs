use std::path::Path;

use pentropy::alpha::alpha_complex;
use pentropy::ingest::LabelFormat;
use pentropy::par;
use pentropy::pipeline::{
    entropy_csv, process_bytes, run_entropy_batch, EntropyInput, InfiniteMode, PipelineConfig, SummaryTable,
};
use pentropy::synth::{generate, random_sites, voronoi_label_map, SynthKind};
use pentropy::{
    compute_centroids, compute_persistence, load_label_matrix, spiral_select, summarize_entropy, InfinitePolicy,
};

#[test]
fn cloud_file_equals_stage_by_stage() {
    let pc = generate(SynthKind::HexJitter { sigma: 0.25 }, 200, 5);
    let cfg = PipelineConfig::default();
    let row = process_bytes(Path::new("s.csv"), pc.to_csv().as_bytes(), "g", &cfg).unwrap();

    let reread = pentropy::PointCloud::from_csv(&pc.to_csv()).unwrap();
    let fc = alpha_complex(&reread).unwrap();
    let b = compute_persistence(&fc).unwrap();
    let s = summarize_entropy(&b, InfinitePolicy::Drop, 2.0).unwrap();
    assert_eq!(row.summary, s);
    assert_eq!(row.barcode, b);
}

#[test]
fn matrix_file_equals_stage_by_stage() {
    let m = voronoi_label_map(256, &random_sites(256, 150, 8));
    let bytes = m.to_pgm();
    let cfg = PipelineConfig { n_cells: 100, infinite: InfiniteMode::Cap, ..Default::default() };
    let row = process_bytes(Path::new("m.pgm"), &bytes, "g", &cfg).unwrap();

    let m2 = load_label_matrix(&bytes, LabelFormat::Pgm).unwrap();
    assert_eq!(m, m2);
    let cells = spiral_select(&m2, 100, (128, 128)).unwrap();
    let pc = compute_centroids(&m2, &cells).unwrap();
    let fc = alpha_complex(&pc).unwrap();
    let b = compute_persistence(&fc).unwrap();
    let s = summarize_entropy(&b, InfinitePolicy::Cap(fc.max_value()), 2.0).unwrap();
    assert_eq!(row.summary, s);
    assert_eq!(row.n_cells, 100);
}

#[test]
fn batch_matches_sequential_and_keeps_order() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("wing");
    std::fs::create_dir(&dir).unwrap();
    let mut inputs = Vec::new();
    for i in 0..12 {
        let p = dir.join(format!("c{i:02}.csv"));
        std::fs::write(&p, generate(SynthKind::Uniform, 30 + i, i as u64).to_csv()).unwrap();
        inputs.push(EntropyInput::new(&p, None));
    }
    inputs.push(EntropyInput::new(dir.join("missing.csv"), None));
    let cfg = PipelineConfig::default();
    let batch = run_entropy_batch(&inputs, &cfg);
    let seq = par::map_sequential(&inputs, |inp| {
        let bytes = std::fs::read(&inp.path).ok()?;
        process_bytes(&inp.path, &bytes, &inp.group, &cfg).ok()
    });
    assert_eq!(batch.len(), seq.len());
    for (b, s) in batch.iter().zip(&seq) {
        assert_eq!(b.as_ref().ok(), s.as_ref());
    }
    assert!(batch.last().unwrap().is_err());
    let ok: Vec<_> = batch.iter().filter_map(|r| r.as_ref().ok()).collect();
    assert_eq!(ok[0].group, dir.file_name().unwrap().to_string_lossy());
    let csv = entropy_csv(ok.iter().copied());
    let t = SummaryTable::parse(&csv).unwrap();
    assert_eq!(t.rows.len(), 12);
}
