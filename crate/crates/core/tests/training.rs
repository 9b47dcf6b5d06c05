use l2cds::dynsys::{collect_dataset, CollectOptions, SystemKind, SystemSpec};
use l2cds::trainer::{train, Preset};

#[test]
fn wedge_preset_reduces_total_loss_tenfold() {
    let collect = |kind, seed| collect_dataset(&SystemSpec::new(kind), CollectOptions::new(30, 100, seed)).unwrap();
    let a = collect(SystemKind::WedgeLeft, 1);
    let b = collect(SystemKind::WedgeRight, 2);
    let out = train(&a, &b, &Preset::Wedge.config()).unwrap();
    let first = out.log.first().unwrap().loss.total;
    let last = out.log.last().unwrap().loss.total;
    assert!(last < 0.1 * first, "loss {first} -> {last}");
}
