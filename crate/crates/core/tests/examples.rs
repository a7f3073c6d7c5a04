//! Every example under `examples/` runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));

            #[test]
            fn runs() {
                main().unwrap();
            }
        }
    };
}

example!(conjugate_posterior);
example!(annealed_langevin);
example!(map_vs_sampling);
example!(covering_numbers);
example!(transport_distances);
example!(information_bounds);
example!(two_ball);
example!(inpainting);
example!(run_harness);
