from django.db import models


class RunRecord(models.Model):
    """One solved (scenario, eps) pair, archived at the end of a ``solve`` command."""
    STATUS_OK = 'ok'
    STATUS_FAILED = 'failed'
    STATUS_CHOICES = [
        (STATUS_OK, 'Converged'),
        (STATUS_FAILED, 'Convergence failure'),
    ]

    scenario_id = models.CharField(max_length=100, db_index=True)
    eps = models.FloatField()
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default=STATUS_OK)

    # Per grid point values; nu1/nu_m1 are densities with respect to m.
    z = models.JSONField(default=list)
    h = models.JSONField(default=list)
    nu1 = models.JSONField(default=list)
    nu_m1 = models.JSONField(default=list)

    value_eps = models.FloatField(null=True, blank=True)
    dual_eps = models.FloatField(null=True, blank=True)
    gap_eps = models.FloatField(null=True, blank=True)
    upper_t0 = models.FloatField(null=True, blank=True, verbose_name="Upper value T0")
    lower_unreg = models.FloatField(null=True, blank=True)
    gap_unreg = models.FloatField(null=True, blank=True)
    iterations = models.PositiveIntegerField(default=0)
    grad_norm = models.FloatField(null=True, blank=True)
    max_abs_h = models.FloatField(null=True, blank=True)
    lipschitz = models.FloatField(null=True, blank=True)
    wall_time = models.FloatField(default=0.0, help_text="Seconds spent solving and certifying.")

    classifier_csv = models.CharField(max_length=500, blank=True)
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['scenario_id', '-eps']

    def __str__(self):
        return f"{self.scenario_id} eps={self.eps:g} ({self.status})"
