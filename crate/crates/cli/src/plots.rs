//! Static SVG figures. Layout is fixed and nothing time-dependent is drawn,
//! so identical inputs give identical bytes.

use anyhow::{anyhow, Result};
use kc_core::encoders::k_sigmoid;
use kc_core::Mat;
use plotters::prelude::*;

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn plot_err<E: std::fmt::Debug>(e: E) -> anyhow::Error {
    anyhow!("plotting failed: {e:?}")
}

/// `1 / (1 + k e^{−z})` over `z ∈ [−6, 6]`, one curve per `k`.
pub fn sigmoid_family_svg(ks: &[f64]) -> Result<String> {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (640, 420)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption("k-sigmoid", ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(44)
            .build_cartesian_2d(-6.0f64..6.0, 0.0f64..1.0)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc("z").y_desc("σ_k(z)").draw().map_err(plot_err)?;
        for (i, &k) in ks.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts = (0..=240)
                .map(|s| {
                    let z = -6.0 + 12.0 * s as f64 / 240.0;
                    k_sigmoid(z, k).map(|v| (z, v))
                })
                .collect::<kc_core::Result<Vec<_>>>()?;
            chart
                .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                .map_err(plot_err)?
                .label(format!("k = {k}"))
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        }
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::UpperLeft)
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let pad = 0.05 * (hi - lo).max(1e-9);
    (lo - pad, hi + pad)
}

fn hue(t: f64, lo: f64, hi: f64) -> HSLColor {
    HSLColor(0.75 * (t - lo) / (hi - lo).max(1e-12), 0.7, 0.45)
}

/// Left: the roll's `(x, z)` coordinates. Right: a 2-D embedding of the
/// same points. Both colored by the spiral parameter.
pub fn swiss_roll_svg(data: &Mat, colour: &[f64], embedding: &Mat) -> Result<String> {
    let (clo, chi) = bounds(colour.iter().copied());
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (960, 440)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let (left, right) = root.split_horizontally(480);
        let panels = [(left, data, 0, 2, "Swiss roll (x, z)"), (right, embedding, 0, 1, "ISOMAP embedding")];
        for (area, m, a, b, title) in panels {
            let (x0, x1) = bounds(m.column(a).iter().copied());
            let (y0, y1) = bounds(m.column(b).iter().copied());
            let mut chart = ChartBuilder::on(&area)
                .caption(title, ("sans-serif", 18))
                .margin(12)
                .x_label_area_size(30)
                .y_label_area_size(40)
                .build_cartesian_2d(x0..x1, y0..y1)
                .map_err(plot_err)?;
            chart.configure_mesh().draw().map_err(plot_err)?;
            chart
                .draw_series((0..m.nrows()).map(|i| {
                    Circle::new((m[(i, a)], m[(i, b)]), 2, hue(colour[i], clo, chi).filled())
                }))
                .map_err(plot_err)?;
        }
        root.present().map_err(plot_err)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_plot_is_deterministic() {
        let a = sigmoid_family_svg(&[0.5, 1.0, 2.0, 4.0]).unwrap();
        let b = sigmoid_family_svg(&[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(a.starts_with("<svg"));
        assert_eq!(a, b);
        assert!(a.contains("k = 4"));
    }

    #[test]
    fn roll_plot_has_both_panels() {
        let roll = kc_core::manifold::swiss_roll(50, 0.0, 1);
        let emb = roll.latent();
        let svg = swiss_roll_svg(&roll.data, &roll.t, &emb).unwrap();
        assert!(svg.contains("ISOMAP"));
        assert_eq!(svg.matches("<circle").count(), 100);
    }
}
