use casku::block::Block32;
use casku::group::GroupParams;
use casku::registry::{ChCredential, CmCredential, GbsNetwork, NuavCredential, RegistryError};
use rand::RngCore;

/// One origin cluster with its members and the NUAVs dispatched to it, plus
/// `n_ch - 1` other clusters spread over two ground stations.
#[derive(Debug, Clone)]
pub struct Swarm {
    pub gp: GroupParams,
    pub net: GbsNetwork,
    pub ch: ChCredential,
    pub cms: Vec<CmCredential>,
    pub peers: Vec<ChCredential>,
    pub nuavs: Vec<NuavCredential>,
}

impl Swarm {
    pub fn build<R: RngCore + ?Sized>(
        gp: &GroupParams,
        n_nuav: usize,
        n_cm: usize,
        n_ch: usize,
        rng: &mut R,
    ) -> Result<Self, RegistryError> {
        let n_gbs = if n_ch > 1 { 2 } else { 1 };
        let mut net = GbsNetwork::setup(gp, n_gbs, rng)?;
        let origin = net.register_ch(0, b"ch-0", rng)?;
        let mut peer_ids = Vec::with_capacity(n_ch.saturating_sub(1));
        for j in 1..n_ch {
            let rid = format!("ch-{j}");
            peer_ids.push(net.register_ch(j % n_gbs, rid.as_bytes(), rng)?.cluster);
        }
        let cms = (0..n_cm)
            .map(|l| net.register_cm(origin.cluster, format!("cm-{l}").as_bytes(), rng))
            .collect::<Result<Vec<_>, _>>()?;
        let nuavs = (0..n_nuav).map(|_| net.provision_nuav(origin.cluster, rng)).collect::<Result<Vec<_>, _>>()?;
        let ch = net.ch_credential(origin.cluster)?;
        let peers = peer_ids.iter().map(|id| net.ch_credential(*id)).collect::<Result<Vec<_>, _>>()?;
        Ok(Swarm { gp: gp.clone(), net, ch, cms, peers, nuavs })
    }

    pub fn peer_pids(&self) -> Vec<Block32> {
        self.peers.iter().map(|p| p.pid).collect()
    }

    /// Re-reads the origin and peer credentials after roster changes.
    pub fn refresh(&mut self) -> Result<(), RegistryError> {
        self.ch = self.net.ch_credential(self.ch.cluster)?;
        for p in &mut self.peers {
            *p = self.net.ch_credential(p.cluster)?;
        }
        Ok(())
    }
}
