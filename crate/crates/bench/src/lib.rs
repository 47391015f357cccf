//! Fixtures shared by the criterion benches.

use ua_core::initdata::prepare_initial_data;
use ua_core::{Model, ModelId, PreparationOrder, TwoScaleField};

/// Problem at its test-run resolution with order-2 prepared data.
pub fn fixture(id: ModelId, eps: f64) -> (Model, TwoScaleField) {
    let (nx, ntau) = match id {
        ModelId::Nkg => (200, 64),
        ModelId::Nls => (64, 2048),
    };
    let m = Model::paper(id, nx, eps).expect("valid model");
    let f = m.field();
    let u0 = m.paper_initial_data().expect("initial data");
    let tg = f.tau_grid(ntau).expect("tau grid");
    let data = prepare_initial_data(f, &u0, &tg, PreparationOrder::Two).expect("prepared data");
    (m, data)
}
