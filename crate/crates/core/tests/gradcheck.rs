mod common;

use common::grad_suite::*;

#[test]
fn convolution() {
    assert_all(&conv_ops());
}

#[test]
fn matrix() {
    assert_all(&matrix_ops());
}

#[test]
fn activations() {
    assert_all(&activation_ops());
}

#[test]
fn structural() {
    assert_all(&structural_ops());
}

#[test]
fn resampling() {
    assert_all(&resampling_ops());
}

#[test]
fn losses() {
    assert_all(&loss_ops());
}

#[test]
fn dfab() {
    assert_all(&dfab_block());
}

#[test]
fn ssawb() {
    assert_all(&ssawb_block());
}

#[test]
fn network_loss_on_sampled_parameters() {
    assert_all(&full_network());
}
