use nexp_core::matching::sub_plateaux;
use nexp_core::natext::build_domain;
use nexp_core::quilt::Quilt;
use nexp_core::{enumerate_matching_pairs, MatchingPair, Point};

#[test]
fn natural_extension_is_invariant_on_samples() {
    for n in [2, 3, 8] {
        for p in enumerate_matching_pairs(n).unwrap().pairs {
            let h = p.heights();
            let dom = build_domain(&p, 0.5 * (h.a + h.b)).unwrap();
            let mut rng = nexp_core::rng::stream(n);
            for _ in 0..2000 {
                let q = dom.sample(&mut rng);
                let img = dom.step(q).unwrap();
                assert!(dom.contains(img), "{p:?}: {q:?} -> {img:?}");
                let j = dom.params().digit(q.x).unwrap();
                let back = dom.inverse(j, img).unwrap();
                assert!((back.x - q.x).abs() < 1e-9 && (back.y - q.y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn quilting_map_is_injective_on_samples() {
    let p = MatchingPair::new(2, 1, 3).unwrap();
    let s = sub_plateaux(&p, 400)
        .into_iter()
        .max_by(|a, b| (a.hi - a.lo).total_cmp(&(b.hi - b.lo)))
        .unwrap();
    let w = s.hi - s.lo;
    let q = Quilt::new(&p, s.lo + 0.2 * w, s.lo + 0.8 * w).unwrap();
    let mut rng = nexp_core::rng::stream(77);
    let mut pairs: Vec<(Point, Point)> = (0..100_000)
        .map(|_| {
            let x = q.source().sample(&mut rng);
            (q.map(x).unwrap(), x)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.x.total_cmp(&b.0.x));
    let mut collisions = 0;
    for (i, (img, src)) in pairs.iter().enumerate() {
        for (img2, src2) in pairs[i + 1..].iter().take_while(|o| o.0.x - img.x <= 1e-12) {
            if (img2.y - img.y).abs() <= 1e-12 && src != src2 {
                collisions += 1;
            }
        }
    }
    assert_eq!(collisions, 0);
}

#[test]
fn quilting_rejects_points_outside_the_source() {
    let p = MatchingPair::new(8, 4, 6).unwrap();
    let s = sub_plateaux(&p, 400)[0];
    let q = Quilt::new(&p, s.lo + 0.3 * (s.hi - s.lo), s.lo + 0.6 * (s.hi - s.lo)).unwrap();
    assert!(q.map(Point::new(0.0, 0.0)).is_err());
}
